//! Weighted eigenvalues of a partially hinged rectangular plate and
//! bang-bang density optimization.
//!
//! The plate occupies `Ω = (0, π) × (-ℓ, ℓ)`, hinged on `x = 0, π` and free
//! on `y = ±ℓ`. For a density `p` with `α ≤ p ≤ β` and mean one, the
//! eigenvalues of `Δ²u = λ p u` split into y-even (longitudinal, `μ`) and
//! y-odd (torsional, `ν`) families.

pub mod numerics;
pub mod spectrum;
pub mod weights;
pub mod galerkin;
pub mod optimize;
pub mod cli;

pub use numerics::Scalar;

/// Scalar type of the plate-specific modules.
pub type Real = f64;
pub type SymMatrixF64 = numerics::SymMatrix<f64>;
pub type SymEigenF64 = numerics::SymEigen<f64>;
pub type BracketF64 = numerics::Bracket<f64>;
pub type QuadratureRuleF64 = numerics::QuadratureRule<f64>;
