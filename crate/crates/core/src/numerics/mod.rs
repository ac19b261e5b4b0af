//! Scalar numerical kernels shared by the rest of the crate.
//!
//! Everything here is generic over [`Scalar`], so the kernels run on `f32`
//! and `f64` alike. The plate-specific modules instantiate them with `f64`.

mod quadrature;
mod roots;
mod symeig;

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};
use thiserror::Error;

pub use quadrature::{gauss_legendre, integrate_1d, integrate_2d, QuadratureRule, RuleKind};
pub use roots::{find_root, Bracket};
pub use symeig::{sym_eig, SymEigen, SymMatrix};

/// Floating point types the kernels accept.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("non-finite value {value} encountered at {at}")]
    NonFinite { at: f64, value: f64 },
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),
    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}

pub(crate) fn as_f64<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}
