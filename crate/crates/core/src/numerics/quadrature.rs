use super::{as_f64, NumericsError, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    GaussLegendre,
    CompositeMidpoint,
}

/// A 1D rule applied independently on every smooth piece of an interval.
///
/// `order` is the number of Gauss points per piece, or the number of
/// midpoint cells per piece. Breakpoints split the interval where the
/// integrand has kinks or jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub kind: RuleKind,
    pub order: usize,
    pub breakpoints: Vec<T>,
}

impl<T: Scalar> QuadratureRule<T> {
    pub fn gauss_legendre(order: usize) -> Self {
        Self {
            kind: RuleKind::GaussLegendre,
            order,
            breakpoints: Vec::new(),
        }
    }

    pub fn composite_midpoint(cells: usize) -> Self {
        Self {
            kind: RuleKind::CompositeMidpoint,
            order: cells,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<T>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    /// Nodes and weights for the rule on `[a, b]`, piece by piece in
    /// increasing order.
    pub fn nodes(&self, a: T, b: T) -> Result<Vec<(T, T)>, NumericsError> {
        if self.order == 0 {
            return Err(NumericsError::InvalidRule("order must be positive".into()));
        }
        if !(a < b) {
            return Err(NumericsError::InvalidRule(format!(
                "empty interval [{}, {}]",
                as_f64(a),
                as_f64(b)
            )));
        }
        let mut edges = Vec::with_capacity(self.breakpoints.len() + 2);
        edges.push(a);
        for &bp in &self.breakpoints {
            let last = *edges.last().unwrap();
            if !(bp > last && bp < b) {
                return Err(NumericsError::InvalidRule(format!(
                    "breakpoint {} not strictly increasing inside ({}, {})",
                    as_f64(bp),
                    as_f64(a),
                    as_f64(b)
                )));
            }
            edges.push(bp);
        }
        edges.push(b);

        let half = T::lit(0.5);
        let mut out = Vec::new();
        match self.kind {
            RuleKind::GaussLegendre => {
                let (xs, ws) = gauss_legendre::<T>(self.order);
                for piece in edges.windows(2) {
                    let (lo, hi) = (piece[0], piece[1]);
                    let c = (lo + hi) * half;
                    let r = (hi - lo) * half;
                    out.extend(xs.iter().zip(&ws).map(|(&x, &w)| (c + r * x, r * w)));
                }
            }
            RuleKind::CompositeMidpoint => {
                let n = T::from_usize(self.order).unwrap();
                for piece in edges.windows(2) {
                    let (lo, hi) = (piece[0], piece[1]);
                    let h = (hi - lo) / n;
                    for i in 0..self.order {
                        let x = lo + h * (T::from_usize(i).unwrap() + half);
                        out.push((x, h));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut xs = vec![T::zero(); n];
    let mut ws = vec![T::zero(); n];
    let one = T::one();
    let two = T::lit(2.0);
    let nf = T::from_usize(n).unwrap();
    let eps = T::epsilon() * T::lit(4.0);
    for i in 0..n.div_ceil(2) {
        let fi = T::from_usize(i).unwrap();
        let mut x = (T::lit(std::f64::consts::PI) * (fi + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            // Three-term recurrence for P_n and its derivative.
            let (mut p0, mut p1) = (one, x);
            for k in 2..=n {
                let kf = T::from_usize(k).unwrap();
                let p2 = ((two * kf - one) * x * p1 - (kf - one) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { one } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - one);
            let dx = pn / dp;
            x = x - dx;
            if dx.abs() <= eps {
                break;
            }
        }
        let w = two / ((one - x * x) * dp * dp);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        xs[n / 2] = T::zero();
    }
    (xs, ws)
}

fn checked<T: Scalar>(v: T, at: T) -> Result<T, NumericsError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericsError::NonFinite {
            at: as_f64(at),
            value: as_f64(v),
        })
    }
}

pub fn integrate_1d<T, F>(mut f: F, a: T, b: T, rule: &QuadratureRule<T>) -> Result<T, NumericsError>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let mut acc = T::zero();
    for (x, w) in rule.nodes(a, b)? {
        acc = acc + w * checked(f(x), x)?;
    }
    Ok(acc)
}

/// Tensor-product quadrature over `[x0, x1] × [y0, y1]`.
///
/// Summation order is fixed (x outer, y inner) so results are reproducible.
pub fn integrate_2d<T, F>(
    mut f: F,
    (x0, x1): (T, T),
    rule_x: &QuadratureRule<T>,
    (y0, y1): (T, T),
    rule_y: &QuadratureRule<T>,
) -> Result<T, NumericsError>
where
    T: Scalar,
    F: FnMut(T, T) -> T,
{
    let nx = rule_x.nodes(x0, x1)?;
    let ny = rule_y.nodes(y0, y1)?;
    let mut acc = T::zero();
    for &(x, wx) in &nx {
        let mut inner = T::zero();
        for &(y, wy) in &ny {
            inner = inner + wy * checked(f(x, y), x)?;
        }
        acc = acc + wx * inner;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const ELL: f64 = PI / 150.0;

    #[test]
    fn nodes_are_exact_for_high_degree_polynomials() {
        let (xs, ws) = gauss_legendre::<f64>(24);
        for deg in 0..48usize {
            let q: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-13, "degree {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn area_of_the_plate() {
        let rx = QuadratureRule::gauss_legendre(24);
        let ry = QuadratureRule::gauss_legendre(16);
        let a = integrate_2d(|_, _| 1.0, (0.0, PI), &rx, (-ELL, ELL), &ry).unwrap();
        assert!((a - 2.0 * PI * ELL).abs() < 1e-14);
    }

    #[test]
    fn sin_squared_and_fourth_power() {
        let rx = QuadratureRule::gauss_legendre(24);
        let ry = QuadratureRule::gauss_legendre(16);
        let s2 = integrate_2d(|x: f64, _| x.sin().powi(2), (0.0, PI), &rx, (-ELL, ELL), &ry).unwrap();
        assert!((s2 - PI / 2.0 * 2.0 * ELL).abs() < 1e-14);
        // sin^4(5x) needs the five humps resolved: split at the zeros.
        let bps: Vec<f64> = (1..5).map(|h| h as f64 * PI / 5.0).collect();
        let rx = QuadratureRule::gauss_legendre(24).with_breakpoints(bps);
        let s4 = integrate_2d(|x: f64, _| (5.0 * x).sin().powi(4), (0.0, PI), &rx, (-ELL, ELL), &ry)
            .unwrap();
        assert!((s4 - 3.0 * PI / 8.0 * 2.0 * ELL).abs() < 1e-14);
    }

    #[test]
    fn breakpoints_are_additive() {
        let f = |x: f64, y: f64| if x < 1.0 { (x * y).cos() + 2.0 } else { x.exp() * y * y };
        let rx = QuadratureRule::gauss_legendre(12).with_breakpoints(vec![1.0]);
        let ry = QuadratureRule::gauss_legendre(10);
        let whole = integrate_2d(f, (0.0, PI), &rx, (-ELL, ELL), &ry).unwrap();
        let rx0 = QuadratureRule::gauss_legendre(12);
        let left = integrate_2d(f, (0.0, 1.0), &rx0, (-ELL, ELL), &ry).unwrap();
        let right = integrate_2d(f, (1.0, PI), &rx0, (-ELL, ELL), &ry).unwrap();
        assert!((whole - (left + right)).abs() <= 1e-13 * whole.abs());
    }

    #[test]
    fn midpoint_rule_converges() {
        let r = QuadratureRule::composite_midpoint(2000);
        let v = integrate_1d(|x: f64| x.sin(), 0.0, PI, &r).unwrap();
        assert!((v - 2.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_breakpoints_and_non_finite_integrands() {
        let r = QuadratureRule::gauss_legendre(4).with_breakpoints(vec![2.0, 1.0]);
        assert!(r.nodes(0.0, 3.0).is_err());
        let r = QuadratureRule::gauss_legendre(4).with_breakpoints(vec![5.0]);
        assert!(r.nodes(0.0, 3.0).is_err());
        let r = QuadratureRule::gauss_legendre(4);
        assert!(matches!(
            integrate_1d(|x: f64| 1.0 / (x - x), 0.0, 1.0, &r),
            Err(NumericsError::NonFinite { .. })
        ));
    }

    #[test]
    fn single_precision_rule() {
        let r = QuadratureRule::<f32>::gauss_legendre(8);
        let v = integrate_1d(|x: f32| x * x, 0.0, 1.0, &r).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-6);
    }
}
