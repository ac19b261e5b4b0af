use super::{as_f64, NumericsError, Scalar};

/// Closed interval `[lo, hi]` expected to contain a sign change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    lo: T,
    hi: T,
}

impl<T: Scalar> Bracket<T> {
    pub fn new(lo: T, hi: T) -> Result<Self, NumericsError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(NumericsError::InvalidBracket {
                lo: as_f64(lo),
                hi: as_f64(hi),
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }
}

fn eval<T: Scalar, F: FnMut(T) -> T>(f: &mut F, x: T) -> Result<T, NumericsError> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericsError::NonFinite {
            at: as_f64(x),
            value: as_f64(v),
        })
    }
}

/// Bisection on a sign-changing bracket, finished by one regula-falsi step
/// inside the final interval.
///
/// Stops once the bracket width is below `tol_rel * max(|lo|, |hi|)` or no
/// further floating point progress is possible.
pub fn find_root<T, F>(mut f: F, bracket: Bracket<T>, tol_rel: T) -> Result<T, NumericsError>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let mut f_lo = eval(&mut f, lo)?;
    let mut f_hi = eval(&mut f, hi)?;
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(NumericsError::NoSignChange {
            lo: as_f64(lo),
            hi: as_f64(hi),
            f_lo: as_f64(f_lo),
            f_hi: as_f64(f_hi),
        });
    }
    let two = T::lit(2.0);
    // 2^-400 is far below any tolerance anyone asks for.
    for _ in 0..400 {
        let scale = lo.abs().max(hi.abs());
        if hi - lo <= tol_rel * scale {
            break;
        }
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = eval(&mut f, mid)?;
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    // Secant polish through the final endpoints, clamped to the bracket.
    let x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    if x.is_finite() && x >= lo && x <= hi {
        Ok(x)
    } else {
        Ok(lo + (hi - lo) / two)
    }
}
