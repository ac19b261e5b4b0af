//! Spectrum of the homogeneous plate (density identically one).
//!
//! Separation of variables gives eigenfunctions `φ(y) sin(m x)` where the
//! profile `φ` solves `φ'''' - 2m²φ'' + m⁴φ = Λφ` on `(-ℓ, ℓ)` with the
//! free-edge conditions `φ'' - σm²φ = 0` and `φ''' - (2-σ)m²φ' = 0` at
//! `y = ±ℓ`. With `s = √Λ` the characteristic roots are `±√(m² + s)` and
//! `±√(m² - s)`, which are real below `Λ = m⁴` and imaginary above it.
//! Even profiles give the longitudinal modes, odd profiles the torsional
//! ones.
//!
//! Each branch reduces the boundary conditions to a 2×2 determinant in the
//! two free amplitudes. Columns are rescaled by `cosh`/`sinh` of the
//! boundary argument (and by `1/w` on the odd branches) so nothing
//! overflows and the odd determinant stays continuous through `Λ = m⁴`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{find_root, gauss_legendre, Bracket, NumericsError};

/// Relative bracket width at which eigenvalue bisection stops.
pub const ROOT_TOL: f64 = 1e-13;
/// Default upper limit on the number of modes per parity.
pub const DEFAULT_MODE_CAP: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("half-width ell must be positive and finite, got {0}")]
    Ell(f64),
    #[error("Poisson ratio sigma must lie in (0, 1/2), got {0}")]
    Sigma(f64),
    #[error("density bounds must satisfy 0 < alpha < 1 < beta, got alpha = {alpha}, beta = {beta}")]
    Bounds { alpha: f64, beta: f64 },
    #[error("n_modes must be at least 1")]
    NoModes,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("lambda = {lam} lies on the wrong side of m^4 = {m4} for branch {branch:?}")]
    BranchMismatch { lam: f64, m4: f64, branch: Branch },
    #[error("mode {0:?} does not exist for this plate")]
    NotAdmissible(Mode),
    #[error("could not isolate the eigenvalue of mode {mode:?}: {source}")]
    RootIsolationFailure { mode: Mode, source: NumericsError },
    #[error("degenerate geometry: s* = {s_star} is an integer")]
    C0Violated { s_star: f64 },
    #[error("requested {requested} modes, above the cap of {cap}")]
    TooManyModes { requested: usize, cap: usize },
}

/// Geometry, material and discretization parameters of the plate
/// `Ω = (0, π) × (-ℓ, ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateConfig {
    pub ell: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n_modes: usize,
}

impl PlateConfig {
    pub fn new(ell: f64, sigma: f64, alpha: f64, beta: f64, n_modes: usize) -> Result<Self, ConfigError> {
        let cfg = Self {
            ell,
            sigma,
            alpha,
            beta,
            n_modes,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `σ = 0.2`, `ℓ = π/150`, `α = 0.5`, `β = 1.5`, `N = 30`.
    pub fn reference() -> Self {
        Self {
            ell: PI / 150.0,
            sigma: 0.2,
            alpha: 0.5,
            beta: 1.5,
            n_modes: 30,
        }
    }

    pub fn with_n_modes(mut self, n: usize) -> Self {
        self.n_modes = n;
        self
    }

    pub fn with_ell(mut self, ell: f64) -> Self {
        self.ell = ell;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.ell.is_finite() && self.ell > 0.0) {
            return Err(ConfigError::Ell(self.ell));
        }
        if !(self.sigma > 0.0 && self.sigma < 0.5) {
            return Err(ConfigError::Sigma(self.sigma));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0 && self.beta > 1.0 && self.beta.is_finite()) {
            return Err(ConfigError::Bounds {
                alpha: self.alpha,
                beta: self.beta,
            });
        }
        if self.n_modes == 0 {
            return Err(ConfigError::NoModes);
        }
        Ok(())
    }

    /// `|Ω| = 2πℓ`
    pub fn area(&self) -> f64 {
        2.0 * PI * self.ell
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// y-even, longitudinal
    Even,
    /// y-odd, torsional
    Odd,
}

impl Parity {
    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mode {
    pub m: u32,
    pub k: u32,
    pub parity: Parity,
}

impl Mode {
    pub fn new(m: u32, k: u32, parity: Parity) -> Self {
        Self { m, k, parity }
    }
}

/// Which side of `m⁴` and which parity a profile lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `Λ < m⁴`, cosh/cosh
    EvenLow,
    /// `Λ > m⁴`, cosh/cos
    EvenHigh,
    /// `Λ < m⁴`, sinh/sinh
    OddLow,
    /// `Λ > m⁴`, sinh/sin
    OddHigh,
}

impl Branch {
    fn is_low(self) -> bool {
        matches!(self, Branch::EvenLow | Branch::OddLow)
    }

    fn for_lambda(parity: Parity, lam: f64, m4: f64) -> Self {
        match (parity, lam < m4) {
            (Parity::Even, true) => Branch::EvenLow,
            (Parity::Even, false) => Branch::EvenHigh,
            (Parity::Odd, true) => Branch::OddLow,
            (Parity::Odd, false) => Branch::OddHigh,
        }
    }
}

/// `(w, w̄)` with `w = √|√Λ - m²|` and `w̄ = √(√Λ + m²)`.
fn wavenumbers(lam: f64, m: f64) -> (f64, f64) {
    let s = lam.sqrt();
    let m2 = m * m;
    ((s - m2).abs().sqrt(), (s + m2).sqrt())
}

/// `tanh(wℓ)/w`, continuous at `w = 0`.
fn tanh_over(w: f64, ell: f64) -> f64 {
    if w * ell < 1e-8 {
        ell
    } else {
        (w * ell).tanh() / w
    }
}

/// `sin(wℓ)/w`, continuous at `w = 0`.
fn sin_over(w: f64, ell: f64) -> f64 {
    if w * ell < 1e-8 {
        ell
    } else {
        (w * ell).sin() / w
    }
}

/// Row-normalized boundary determinant for wavenumbers `(w, w̄)`.
fn det_core(branch: Branch, m: f64, w: f64, wbar: f64, cfg: &PlateConfig) -> f64 {
    let (sigma, ell) = (cfg.sigma, cfg.ell);
    let m2 = m * m;
    let sm2 = sigma * m2;
    let tm2 = (2.0 - sigma) * m2;
    let (w2, wb2) = (w * w, wbar * wbar);
    let (col1, col2) = match branch {
        Branch::EvenLow => (
            [wb2 - sm2, wbar * (wb2 - tm2) * (wbar * ell).tanh()],
            [w2 - sm2, w * (w2 - tm2) * (w * ell).tanh()],
        ),
        Branch::EvenHigh => (
            [wb2 - sm2, wbar * (wb2 - tm2) * (wbar * ell).tanh()],
            [-(w2 + sm2) * (w * ell).cos(), w * (w2 + tm2) * (w * ell).sin()],
        ),
        Branch::OddLow => (
            [(wb2 - sm2) * (wbar * ell).tanh(), wbar * (wb2 - tm2)],
            [(w2 - sm2) * tanh_over(w, ell), w2 - tm2],
        ),
        Branch::OddHigh => (
            [(wb2 - sm2) * (wbar * ell).tanh(), wbar * (wb2 - tm2)],
            [-(w2 + sm2) * sin_over(w, ell), -(w2 + tm2) * (w * ell).cos()],
        ),
    };
    let r0 = col1[0].abs().max(col2[0].abs());
    let r1 = col1[1].abs().max(col2[1].abs());
    let det = col1[0] * col2[1] - col2[0] * col1[1];
    if r0 > 0.0 && r1 > 0.0 {
        det / (r0 * r1)
    } else {
        det
    }
}

/// Boundary-condition determinant whose zeros in `lam` are the eigenvalues
/// on the given branch. Only the sign and the zeros are meaningful; rows are
/// scaled to unit max-norm.
pub fn characteristic_det(lam: f64, m: u32, branch: Branch, cfg: &PlateConfig) -> Result<f64, SpectrumError> {
    let mf = m as f64;
    let m4 = mf.powi(4);
    let wrong_side = if branch.is_low() { lam >= m4 } else { lam <= m4 };
    if !(lam > 0.0) || wrong_side {
        return Err(SpectrumError::BranchMismatch { lam, m4, branch });
    }
    let (w, wbar) = wavenumbers(lam, mf);
    Ok(det_core(branch, mf, w, wbar, cfg))
}

/// Determinant as a function of `t = wℓ` on a high branch.
fn det_high_t(t: f64, m: f64, branch: Branch, cfg: &PlateConfig) -> f64 {
    let w = t / cfg.ell;
    let wbar = (2.0 * m * m + w * w).sqrt();
    det_core(branch, m, w, wbar, cfg)
}

fn det_low_lambda(lam: f64, m: f64, branch: Branch, cfg: &PlateConfig) -> f64 {
    let (w, wbar) = wavenumbers(lam, m);
    det_core(branch, m, w, wbar, cfg)
}

/// True when `Λ^{m,1}` exists: `ℓm√2 coth(ℓm√2) > ((2-σ)/σ)²`.
pub fn torsional_first_exists(m: u32, cfg: &PlateConfig) -> bool {
    let x = SQRT_2 * m as f64 * cfg.ell;
    let rhs = ((2.0 - cfg.sigma) / cfg.sigma).powi(2);
    x / x.tanh() > rhs
}

/// Largest `m` for which `Λ^{m,1}` does not exist.
pub fn torsional_first_threshold(cfg: &PlateConfig) -> u32 {
    // x coth x is increasing, so bisect on the integer line.
    let (mut lo, mut hi) = (0u32, 1u32);
    while !torsional_first_exists(hi, cfg) {
        lo = hi;
        hi = hi.saturating_mul(2);
        if hi == u32::MAX {
            return hi;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if torsional_first_exists(mid, cfg) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C0Status {
    pub holds: bool,
    pub s_star: f64,
}

/// Solves `tanh(√2 s ℓ) = (σ/(2-σ))² √2 s ℓ` for `s > 0` and reports
/// whether the solution is away from the integers.
pub fn check_c0(cfg: &PlateConfig) -> C0Status {
    let kappa = (cfg.sigma / (2.0 - cfg.sigma)).powi(2);
    let f = |z: f64| z.tanh() - kappa * z;
    let bracket = Bracket::new(1e-6, 1.0 / kappa).expect("valid bracket");
    let z = find_root(f, bracket, 1e-15).expect("tanh(z) = kz has a unique positive root for k < 1");
    let s_star = z / (SQRT_2 * cfg.ell);
    C0Status {
        holds: (s_star - s_star.round()).abs() > 1e-9,
        s_star,
    }
}

/// One term of a profile: `κ^n`-scaled hyperbolic ratio or plain trig.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum Term {
    /// `cosh(κy)/cosh(κℓ)`
    CoshRatio(f64),
    /// `sinh(κy)/sinh(κℓ)`
    SinhRatio(f64),
    /// `cos(κy)`
    Cos(f64),
    /// `sin(κy)`
    Sin(f64),
}

/// `num(κy)/den(κℓ)` where num/den pick cosh or sinh.
fn hyp_ratio(num_cosh: bool, den_cosh: bool, kappa: f64, y: f64, ell: f64) -> f64 {
    let a = kappa * y.abs();
    let b = kappa * ell;
    let sign = if num_cosh || y >= 0.0 { 1.0 } else { -1.0 };
    if b < 20.0 {
        let num = if num_cosh { a.cosh() } else { a.sinh() };
        let den = if den_cosh { b.cosh() } else { b.sinh() };
        return sign * num / den;
    }
    let ea = (-2.0 * a).exp();
    let eb = (-2.0 * b).exp();
    let num = if num_cosh { 1.0 + ea } else { -(-2.0 * a).exp_m1() };
    let den = if den_cosh { 1.0 + eb } else { 1.0 - eb };
    sign * (a - b).exp() * num / den
}

impl Term {
    /// n-th derivative in y, n = 0..=3.
    fn eval(self, y: f64, ell: f64, n: u8) -> f64 {
        match self {
            Term::CoshRatio(k) => {
                let even = n % 2 == 0;
                k.powi(n as i32) * hyp_ratio(even, true, k, y, ell)
            }
            Term::SinhRatio(k) => {
                let even = n % 2 == 0;
                k.powi(n as i32) * hyp_ratio(!even, false, k, y, ell)
            }
            Term::Cos(k) => {
                let v = match n % 4 {
                    0 => (k * y).cos(),
                    1 => -(k * y).sin(),
                    2 => -(k * y).cos(),
                    _ => (k * y).sin(),
                };
                k.powi(n as i32) * v
            }
            Term::Sin(k) => {
                let v = match n % 4 {
                    0 => (k * y).sin(),
                    1 => (k * y).cos(),
                    2 => -(k * y).sin(),
                    _ => -(k * y).cos(),
                };
                k.powi(n as i32) * v
            }
        }
    }
}

/// y-profile `(a·T₁(y) + b·T₂(y)) / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    branch: Branch,
    ell: f64,
    a: f64,
    t1: Term,
    b: f64,
    t2: Term,
    norm: f64,
}

impl Profile {
    fn build(branch: Branch, m: f64, w: f64, wbar: f64, cfg: &PlateConfig) -> Self {
        let sm2 = cfg.sigma * m * m;
        let ell = cfg.ell;
        let (a, t1, b, t2) = match branch {
            Branch::EvenLow => (sm2 - w * w, Term::CoshRatio(wbar), wbar * wbar - sm2, Term::CoshRatio(w)),
            Branch::EvenHigh => {
                // Multiplied through by |cos(wℓ)| so a node of cos at y = ℓ
                // does not blow up the amplitude.
                let c = (w * ell).cos();
                (
                    (sm2 + w * w) * c.abs(),
                    Term::CoshRatio(wbar),
                    (wbar * wbar - sm2) * c.signum(),
                    Term::Cos(w),
                )
            }
            Branch::OddHigh => {
                let s = (w * ell).sin();
                (
                    (sm2 + w * w) * s.abs(),
                    Term::SinhRatio(wbar),
                    (wbar * wbar - sm2) * s.signum(),
                    Term::Sin(w),
                )
            }
            Branch::OddLow => (sm2 - w * w, Term::SinhRatio(wbar), wbar * wbar - sm2, Term::SinhRatio(w)),
        };
        let mut p = Self {
            branch,
            ell,
            a,
            t1,
            b,
            t2,
            norm: 1.0,
        };
        let panels = (wbar.max(w) * ell).ceil() as usize + 1;
        let sq = p.integrate_half(panels, |d| d[0] * d[0]);
        p.norm = ((PI / 2.0) * 2.0 * sq).sqrt();
        p
    }

    /// Integral over `(0, ℓ)` of `g(φ, φ', φ'', φ''')` with composite
    /// Gauss–Legendre, before normalization.
    fn integrate_half<G: Fn([f64; 4]) -> f64>(&self, panels: usize, g: G) -> f64 {
        let (xs, ws) = gauss_legendre::<f64>(16);
        let h = self.ell / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let c = h * (p as f64 + 0.5);
            for (x, w) in xs.iter().zip(&ws) {
                let y = c + 0.5 * h * x;
                acc += 0.5 * h * w * g(self.raw_derivs(y));
            }
        }
        acc
    }

    fn raw_derivs(&self, y: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (n, o) in out.iter_mut().enumerate() {
            *o = self.a * self.t1.eval(y, self.ell, n as u8) + self.b * self.t2.eval(y, self.ell, n as u8);
        }
        out
    }

    /// `[φ, φ', φ'', φ''']` at `y`, normalized.
    pub fn derivs(&self, y: f64) -> [f64; 4] {
        self.raw_derivs(y).map(|v| v / self.norm)
    }

    pub fn value(&self, y: f64) -> f64 {
        (self.a * self.t1.eval(y, self.ell, 0) + self.b * self.t2.eval(y, self.ell, 0)) / self.norm
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Largest y-wavenumber in the profile; governs quadrature resolution.
    pub fn max_wavenumber(&self) -> f64 {
        let k = |t: Term| match t {
            Term::CoshRatio(k) | Term::SinhRatio(k) | Term::Cos(k) | Term::Sin(k) => k,
        };
        k(self.t1).max(k(self.t2))
    }
}

/// Homogeneous eigenpair `Λ`, `φ(y) sin(m x)`.
///
/// `c` and `c_bar` are the y-wavenumbers `√|√Λ - m²|` and `√(√Λ + m²)`.
/// `norm_const` normalizes the profile written with amplitudes
/// `(σm² ∓ c², c̄² - σm²)` over the boundary values of the two basis
/// functions; for the trigonometric branches it is taken after multiplying
/// by `|cos(ℓc)|` (resp. `|sin(ℓc)|`), a positive rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomEigenpair {
    pub mode: Mode,
    pub lambda: f64,
    pub c: f64,
    pub c_bar: f64,
    pub norm_const: f64,
    pub profile: Profile,
}

impl HomEigenpair {
    pub fn m(&self) -> u32 {
        self.mode.m
    }

    /// `‖u‖²_{H²*}` of the normalized eigenfunction by y-quadrature of the
    /// plate energy; equals `lambda` up to quadrature error.
    pub fn energy_by_quadrature(&self, sigma: f64) -> f64 {
        let m2 = (self.mode.m as f64).powi(2);
        let p = &self.profile;
        let panels = (p.max_wavenumber() * p.ell).ceil() as usize + 1;
        let e = p.integrate_half(panels, |d| {
            let lap = d[2] - m2 * d[0];
            lap * lap + (1.0 - sigma) * (2.0 * m2 * d[1] * d[1] + 2.0 * m2 * d[0] * d[2])
        });
        (PI / 2.0) * 2.0 * e / (p.norm * p.norm)
    }
}

pub fn eval_eigenfunction(pair: &HomEigenpair, x: f64, y: f64) -> f64 {
    pair.profile.value(y) * (pair.mode.m as f64 * x).sin()
}

/// Open interval guaranteed to contain the eigenvalue of `mode`, expressed
/// in the solve variable (Λ for low branches, `t = wℓ` for high ones).
fn solve_bracket(mode: Mode, cfg: &PlateConfig) -> (Branch, f64, f64) {
    let m = mode.m as f64;
    let m4 = m.powi(4);
    let k = mode.k as f64;
    match (mode.parity, mode.k) {
        (Parity::Even, 1) => (Branch::EvenLow, (1.0 - cfg.sigma * cfg.sigma) * m4, m4),
        (Parity::Even, _) => (Branch::EvenHigh, PI * (k - 1.5), PI * (k - 1.0)),
        (Parity::Odd, 1) => (Branch::OddLow, f64::NAN, m4),
        (Parity::Odd, _) => {
            let (lo, hi) = odd_high_t_bracket(mode.m, mode.k, cfg);
            (Branch::OddHigh, lo, hi)
        }
    }
}

/// `t = dℓ` interval for the (k-1)-th root on the odd high branch.
fn odd_high_t_bracket(m: u32, k: u32, cfg: &PlateConfig) -> (f64, f64) {
    let j = (k - 1) as f64;
    if torsional_first_exists(m, cfg) {
        ((2.0 * j - 1.0) * FRAC_PI_2, (2.0 * j + 1.0) * FRAC_PI_2)
    } else if k == 2 {
        (0.0, FRAC_PI_2)
    } else {
        ((2.0 * j - 3.0) * FRAC_PI_2, (2.0 * j - 1.0) * FRAC_PI_2)
    }
}

/// Lower bound on the eigenvalue of `mode` from its isolating interval.
fn lower_bound(mode: Mode, cfg: &PlateConfig) -> f64 {
    let m = mode.m as f64;
    match (mode.parity, mode.k) {
        (_, 1) => (1.0 - cfg.sigma * cfg.sigma) * m.powi(4),
        (Parity::Even, _) | (Parity::Odd, _) => {
            let (_, lo, _) = solve_bracket(mode, cfg);
            (m * m + (lo / cfg.ell).powi(2)).powi(2)
        }
    }
}

fn solve_lambda(mode: Mode, cfg: &PlateConfig) -> Result<(Branch, f64), SpectrumError> {
    if mode.m == 0 || mode.k == 0 {
        return Err(SpectrumError::NotAdmissible(mode));
    }
    if mode.parity == Parity::Odd && mode.k == 1 && !torsional_first_exists(mode.m, cfg) {
        return Err(SpectrumError::NotAdmissible(mode));
    }
    let m = mode.m as f64;
    let fail = |source| SpectrumError::RootIsolationFailure { mode, source };
    let (branch, mut lo, hi) = solve_bracket(mode, cfg);
    let lam = match branch {
        Branch::EvenLow | Branch::OddLow => {
            if branch == Branch::OddLow {
                lo = solve_lambda(Mode::new(mode.m, 1, Parity::Even), cfg)?.1;
            }
            let b = Bracket::new(lo, hi).map_err(fail)?;
            find_root(|l| det_low_lambda(l, m, branch, cfg), b, ROOT_TOL).map_err(fail)?
        }
        Branch::EvenHigh | Branch::OddHigh => {
            let b = Bracket::new(lo, hi).map_err(fail)?;
            let t = find_root(|t| det_high_t(t, m, branch, cfg), b, ROOT_TOL).map_err(fail)?;
            (m * m + (t / cfg.ell).powi(2)).powi(2)
        }
    };
    Ok((branch, lam))
}

/// Eigenvalue, wavenumbers and normalized profile for one mode.
pub fn find_hom_eigenvalue(mode: Mode, cfg: &PlateConfig) -> Result<HomEigenpair, SpectrumError> {
    cfg.validate()?;
    let (branch, lambda) = solve_lambda(mode, cfg)?;
    Ok(pair_from_lambda(mode, branch, lambda, cfg))
}

fn pair_from_lambda(mode: Mode, branch: Branch, lambda: f64, cfg: &PlateConfig) -> HomEigenpair {
    let m = mode.m as f64;
    let (c, c_bar) = wavenumbers(lambda, m);
    debug_assert_eq!(Branch::for_lambda(mode.parity, lambda, m.powi(4)), branch);
    let profile = Profile::build(branch, m, c, c_bar, cfg);
    HomEigenpair {
        mode,
        lambda,
        c,
        c_bar,
        norm_const: profile.norm,
        profile,
    }
}

/// Ordered longitudinal (`mu`) and torsional (`nu`) spectra.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomSpectrum {
    pub cfg: PlateConfig,
    pub mu: Vec<HomEigenpair>,
    pub nu: Vec<HomEigenpair>,
    pub j0: usize,
    pub c0: C0Status,
}

impl HomSpectrum {
    pub fn pairs(&self, parity: Parity) -> &[HomEigenpair] {
        match parity {
            Parity::Even => &self.mu,
            Parity::Odd => &self.nu,
        }
    }

    pub fn values(&self, parity: Parity) -> Vec<f64> {
        self.pairs(parity).iter().map(|p| p.lambda).collect()
    }
}

pub fn build_spectrum(cfg: &PlateConfig) -> Result<HomSpectrum, SpectrumError> {
    build_spectrum_capped(cfg, DEFAULT_MODE_CAP)
}

/// Like [`build_spectrum`] with an explicit limit on `n_modes`.
pub fn build_spectrum_capped(cfg: &PlateConfig, cap: usize) -> Result<HomSpectrum, SpectrumError> {
    cfg.validate()?;
    if cfg.n_modes > cap {
        return Err(SpectrumError::TooManyModes {
            requested: cfg.n_modes,
            cap,
        });
    }
    let c0 = check_c0(cfg);
    if !c0.holds {
        return Err(SpectrumError::C0Violated { s_star: c0.s_star });
    }
    let mu = lowest_modes(Parity::Even, cfg.n_modes, cfg)?;
    let nu = lowest_modes(Parity::Odd, cfg.n_modes, cfg)?;
    let nu1 = nu[0].lambda;
    let j0 = count_below(Parity::Even, nu1, cfg)?;
    warn_on_coincidences(&mu, &nu);
    Ok(HomSpectrum { cfg: *cfg, mu, nu, j0, c0 })
}

fn first_k(parity: Parity, m: u32, cfg: &PlateConfig) -> u32 {
    match parity {
        Parity::Even => 1,
        Parity::Odd if torsional_first_exists(m, cfg) => 1,
        Parity::Odd => 2,
    }
}

/// The `n` smallest eigenvalues of one parity, sorted.
///
/// Every eigenvalue with x-frequency `m` exceeds `(1-σ²)m⁴` and the isolating
/// intervals increase with `k`, so the scan stops once those lower bounds
/// pass the current n-th candidate.
fn lowest_modes(parity: Parity, n: usize, cfg: &PlateConfig) -> Result<Vec<HomEigenpair>, SpectrumError> {
    let mut best: Vec<(f64, Mode, Branch)> = Vec::with_capacity(n + 1);
    let insert = |best: &mut Vec<(f64, Mode, Branch)>, item: (f64, Mode, Branch)| {
        let pos = best.partition_point(|b| (b.0, b.1) < (item.0, item.1));
        best.insert(pos, item);
        best.truncate(n);
    };
    // Seed with the lowest mode of each m = 1..n: an upper bound on the
    // n-th eigenvalue.
    for m in 1..=n as u32 {
        let mode = Mode::new(m, first_k(parity, m, cfg), parity);
        let (b, lam) = solve_lambda(mode, cfg)?;
        insert(&mut best, (lam, mode, b));
    }
    let sigma2 = cfg.sigma * cfg.sigma;
    for m in 1u32.. {
        let cutoff = best.last().map_or(f64::INFINITY, |b| b.0);
        if (1.0 - sigma2) * (m as f64).powi(4) >= cutoff {
            break;
        }
        let k0 = first_k(parity, m, cfg);
        let start = if m as usize <= n { k0 + 1 } else { k0 };
        for k in start.. {
            let mode = Mode::new(m, k, parity);
            let cutoff = best.last().map_or(f64::INFINITY, |b| b.0);
            if lower_bound(mode, cfg) >= cutoff {
                break;
            }
            let (b, lam) = solve_lambda(mode, cfg)?;
            insert(&mut best, (lam, mode, b));
        }
    }
    Ok(best
        .into_iter()
        .map(|(lam, mode, b)| pair_from_lambda(mode, b, lam, cfg))
        .collect())
}

/// Number of eigenvalues of one parity strictly below `cutoff`.
pub fn count_below(parity: Parity, cutoff: f64, cfg: &PlateConfig) -> Result<usize, SpectrumError> {
    let sigma2 = cfg.sigma * cfg.sigma;
    let mut count = 0;
    for m in 1u32.. {
        if (1.0 - sigma2) * (m as f64).powi(4) >= cutoff {
            break;
        }
        for k in first_k(parity, m, cfg).. {
            let mode = Mode::new(m, k, parity);
            if lower_bound(mode, cfg) >= cutoff {
                break;
            }
            if solve_lambda(mode, cfg)?.1 < cutoff {
                count += 1;
            }
        }
    }
    Ok(count)
}

fn warn_on_coincidences(mu: &[HomEigenpair], nu: &[HomEigenpair]) {
    let mut all: Vec<(f64, Mode)> = mu.iter().chain(nu).map(|p| (p.lambda, p.mode)).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in all.windows(2) {
        if (w[1].0 - w[0].0).abs() <= 1e-9 * w[1].0 {
            log::warn!("near-multiple eigenvalue {} for modes {:?} and {:?}", w[0].0, w[0].1, w[1].1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> PlateConfig {
        PlateConfig::reference()
    }

    fn sig3(v: f64) -> f64 {
        let e = v.abs().log10().floor();
        let scale = 10f64.powf(e - 2.0);
        (v / scale).round() * scale
    }

    #[test]
    fn config_invariants() {
        assert!(PlateConfig::new(1.0, 0.2, 0.5, 1.5, 1).is_ok());
        assert!(matches!(PlateConfig::new(0.0, 0.2, 0.5, 1.5, 1), Err(ConfigError::Ell(_))));
        assert!(matches!(PlateConfig::new(1.0, 0.5, 0.5, 1.5, 1), Err(ConfigError::Sigma(_))));
        assert!(matches!(PlateConfig::new(1.0, 0.2, 1.0, 1.5, 1), Err(ConfigError::Bounds { .. })));
        assert!(matches!(PlateConfig::new(1.0, 0.2, 0.5, 1.5, 0), Err(ConfigError::NoModes)));
    }

    #[test]
    fn even_low_determinant_changes_sign_on_its_interval() {
        let cfg = reference();
        let m4 = 1.0;
        let lo = (1.0 - 0.04) * m4 + 1e-9;
        let hi = m4 - 1e-9;
        let a = characteristic_det(lo, 1, Branch::EvenLow, &cfg).unwrap();
        let b = characteristic_det(hi, 1, Branch::EvenLow, &cfg).unwrap();
        assert!(a * b < 0.0, "{a} {b}");
    }

    #[test]
    fn even_high_interval_endpoints_bracket_a_root() {
        let cfg = reference();
        let r = PI / cfg.ell;
        let lo = (1.0 + (r * 0.5).powi(2)).powi(2);
        let hi = (1.0 + r * r).powi(2);
        let a = characteristic_det(lo * (1.0 + 1e-12), 1, Branch::EvenHigh, &cfg).unwrap();
        let b = characteristic_det(hi * (1.0 - 1e-12), 1, Branch::EvenHigh, &cfg).unwrap();
        assert!(a * b < 0.0);
    }

    #[test]
    fn branch_mismatch_is_reported() {
        let cfg = reference();
        assert!(matches!(
            characteristic_det(2.0, 1, Branch::EvenLow, &cfg),
            Err(SpectrumError::BranchMismatch { .. })
        ));
        assert!(matches!(
            characteristic_det(0.5, 1, Branch::OddHigh, &cfg),
            Err(SpectrumError::BranchMismatch { .. })
        ));
    }

    #[test]
    fn determinant_vanishes_at_the_eigenvalue() {
        let cfg = reference();
        let p = find_hom_eigenvalue(Mode::new(1, 1, Parity::Even), &cfg).unwrap();
        let d = characteristic_det(p.lambda, 1, Branch::EvenLow, &cfg).unwrap();
        assert!(d.abs() < 1e-10, "{d}");
    }

    #[test]
    fn table_one_spot_values() {
        let cfg = reference();
        let f = |m, k, par| find_hom_eigenvalue(Mode::new(m, k, par), &cfg).unwrap().lambda;
        assert_eq!(sig3(f(1, 1, Parity::Even)), 0.960);
        assert_eq!(sig3(f(10, 1, Parity::Even)), 9610.0);
        assert_eq!(sig3(f(1, 2, Parity::Odd)), 10900.0);
    }

    #[test]
    fn torsional_first_existence() {
        let cfg = reference();
        assert!(!torsional_first_exists(1, &cfg));
        assert!(!torsional_first_exists(2734, &cfg));
        assert!(torsional_first_exists(2735, &cfg));
        assert_eq!(torsional_first_threshold(&cfg), 2734);
        for m in 1..4000 {
            if torsional_first_exists(m, &cfg) {
                assert!(torsional_first_exists(m + 1, &cfg));
            }
        }
        assert!(matches!(
            find_hom_eigenvalue(Mode::new(1, 1, Parity::Odd), &cfg),
            Err(SpectrumError::NotAdmissible(_))
        ));
    }

    #[test]
    fn c0_at_reference_parameters() {
        let cfg = reference();
        let st = check_c0(&cfg);
        // Independent fixed point on z = √2 s ℓ: z = 81 tanh z.
        let mut z = 81.0f64;
        for _ in 0..60 {
            z = 81.0 * z.tanh();
        }
        let s = z / (SQRT_2 * cfg.ell);
        assert!((st.s_star - s).abs() < 1e-8 * s);
        assert!(st.holds);
        assert_eq!(st.s_star.floor() as u32, 2734);
        assert_eq!(st.s_star.ceil() as u32, 2735);
        let nudged = check_c0(&cfg.with_ell(cfg.ell + 1e-12));
        assert_eq!(nudged.holds, st.holds);
    }

    #[test]
    fn c0_switch_matches_existence_at_other_geometry() {
        let cfg = PlateConfig::reference().with_ell(PI / 2.0);
        let st = check_c0(&cfg);
        let first = st.s_star.ceil() as u32;
        assert!(!torsional_first_exists(first - 1, &cfg));
        assert!(torsional_first_exists(first, &cfg));
    }

    #[test]
    fn torsional_first_mode_when_it_exists() {
        // ℓ = π/2: existence switches on near m = 37.
        let cfg = PlateConfig::reference().with_ell(PI / 2.0);
        let low = find_hom_eigenvalue(Mode::new(40, 1, Parity::Even), &cfg).unwrap();
        let p = find_hom_eigenvalue(Mode::new(40, 1, Parity::Odd), &cfg).unwrap();
        assert!(p.lambda > low.lambda && p.lambda < 40f64.powi(4));
        assert!((p.energy_by_quadrature(cfg.sigma) / p.lambda - 1.0).abs() < 1e-6);
    }

    #[test]
    fn eigenfunction_parity_and_hinged_edges() {
        let cfg = reference();
        let s = build_spectrum(&cfg.with_n_modes(8)).unwrap();
        for p in s.mu.iter().chain(&s.nu) {
            let sign = if p.mode.parity == Parity::Even { 1.0 } else { -1.0 };
            for i in 0..=10 {
                let y = cfg.ell * i as f64 / 10.0;
                for x in [0.3, 1.1, 2.9] {
                    let a = eval_eigenfunction(p, x, y);
                    let b = eval_eigenfunction(p, x, -y);
                    assert!((a - sign * b).abs() <= 1e-12 * a.abs().max(1.0));
                }
                assert_eq!(eval_eigenfunction(p, 0.0, y), 0.0);
            }
        }
    }

    #[test]
    fn profiles_are_unit_norm_and_rayleigh_consistent() {
        let cfg = reference();
        let s = build_spectrum(&cfg.with_n_modes(30)).unwrap();
        for p in s.mu.iter().chain(&s.nu) {
            // Independent fine midpoint check of the L² norm.
            let n = 20_000;
            let h = 2.0 * cfg.ell / n as f64;
            let l2: f64 = (0..n)
                .map(|i| {
                    let y = -cfg.ell + h * (i as f64 + 0.5);
                    p.profile.value(y).powi(2) * h
                })
                .sum::<f64>()
                * PI
                / 2.0;
            assert!((l2 - 1.0).abs() < 1e-8, "{:?}: {l2}", p.mode);
            let e = p.energy_by_quadrature(cfg.sigma);
            assert!((e / p.lambda - 1.0).abs() < 1e-5, "{:?}: {e} vs {}", p.mode, p.lambda);
        }
    }

    #[test]
    fn free_edge_conditions_hold() {
        let cfg = reference();
        let s = build_spectrum(&cfg.with_n_modes(10)).unwrap();
        for p in s.mu.iter().chain(&s.nu) {
            let m2 = (p.mode.m as f64).powi(2);
            let d = p.profile.derivs(cfg.ell);
            let scale = d.iter().map(|v| v.abs()).fold(0.0, f64::max) * m2.max(1.0) * p.c_bar.powi(3);
            assert!((d[2] - cfg.sigma * m2 * d[0]).abs() <= 1e-10 * scale);
            assert!((d[3] - (2.0 - cfg.sigma) * m2 * d[1]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn reference_ordering_and_j0() {
        let s = build_spectrum(&reference().with_n_modes(12)).unwrap();
        assert_eq!(s.j0, 10);
        assert_eq!(s.nu[0].mode, Mode::new(1, 2, Parity::Odd));
        assert!(s.mu[0].lambda < s.nu[0].lambda);
        for (i, p) in s.mu.iter().enumerate() {
            assert_eq!(p.mode, Mode::new(i as u32 + 1, 1, Parity::Even));
        }
    }

    #[test]
    fn scan_window_is_complete() {
        let cfg = PlateConfig::reference().with_ell(0.7);
        let a = build_spectrum(&cfg.with_n_modes(25)).unwrap();
        let b = build_spectrum(&cfg.with_n_modes(40)).unwrap();
        for par in [Parity::Even, Parity::Odd] {
            for (x, y) in a.pairs(par).iter().zip(b.pairs(par)) {
                assert_eq!(x.mode, y.mode);
                assert_eq!(x.lambda, y.lambda);
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = reference().with_n_modes(300);
        assert!(matches!(build_spectrum(&cfg), Err(SpectrumError::TooManyModes { .. })));
    }
}
