//! Admissible densities: `α ≤ p ≤ β`, even in `y`, with `∫_Ω p = |Ω|`.
//!
//! Every weight is piecewise constant on a tensor partition of Ω, which is
//! what the Galerkin assembly consumes. Intervals are half-open `[lo, hi)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{find_root, Bracket};
use crate::spectrum::{Parity, PlateConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("invalid weight parameter: {0}")]
    InvalidParameter(String),
    #[error("grid must have nx >= 2 and odd ny >= 3, got {nx} x {ny}")]
    InvalidGrid { nx: usize, ny: usize },
    #[error("grid field expects {expected} cell values, got {got}")]
    FieldSize { expected: usize, got: usize },
    #[error("grid field is not {parity:?} in y: residual {residual:e}")]
    FieldParity { parity: Parity, residual: f64 },
    #[error("target area {target} outside (0, {area})")]
    InvalidTarget { target: f64, area: f64 },
    #[error("field contains non-finite values")]
    NonFiniteField,
}

/// Half-open interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v < self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }
}

fn in_any(intervals: &[Interval], v: f64) -> bool {
    intervals.iter().any(|i| i.contains(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineRule {
    Union,
    Intersection,
}

/// Node counts of the uniform tensor grid used for sampled fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
}

pub const DEFAULT_GRID: Grid = Grid { nx: 600, ny: 31 };

impl Grid {
    pub fn new(nx: usize, ny: usize) -> Result<Self, WeightError> {
        if nx < 2 || ny < 3 || ny % 2 == 0 {
            return Err(WeightError::InvalidGrid { nx, ny });
        }
        Ok(Self { nx, ny })
    }

    pub fn cells_x(&self) -> usize {
        self.nx - 1
    }

    pub fn cells_y(&self) -> usize {
        self.ny - 1
    }

    pub fn n_cells(&self) -> usize {
        self.cells_x() * self.cells_y()
    }

    pub fn x_edges(&self) -> Vec<f64> {
        let n = self.cells_x();
        (0..=n).map(|i| PI * i as f64 / n as f64).collect()
    }

    /// Symmetric by construction: `y_j = -y_{n-j}` bit for bit.
    pub fn y_edges(&self, ell: f64) -> Vec<f64> {
        let n = self.cells_y();
        let half = n / 2;
        (0..=n)
            .map(|j| {
                if j == half {
                    0.0
                } else if j < half {
                    -ell * (half - j) as f64 / half as f64
                } else {
                    ell * (j - half) as f64 / half as f64
                }
            })
            .collect()
    }

    pub fn x_centers(&self) -> Vec<f64> {
        let n = self.cells_x();
        (0..n).map(|i| PI * (2 * i + 1) as f64 / (2 * n) as f64).collect()
    }

    pub fn y_centers(&self, ell: f64) -> Vec<f64> {
        let n = self.cells_y() as i64;
        (0..n).map(|j| ell * (2 * j + 1 - n) as f64 / n as f64).collect()
    }

    /// Cell containing `(x, y)`; points on a grid line belong to the cell
    /// on their right (resp. above).
    pub fn locate(&self, x: f64, y: f64, ell: f64) -> (usize, usize) {
        let cx = self.cells_x();
        let cy = self.cells_y();
        let i = ((x / PI) * cx as f64).floor().clamp(0.0, (cx - 1) as f64) as usize;
        let j = (((y + ell) / (2.0 * ell)) * cy as f64).floor().clamp(0.0, (cy - 1) as f64) as usize;
        (i, j)
    }
}

/// Cell-centered samples on a uniform grid over `[0, π] × [-ℓ, ℓ]`,
/// stored x-major (`i * cells_y + j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawField", into = "RawField")]
pub struct GridField {
    grid: Grid,
    ell: f64,
    parity: Option<Parity>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawField {
    nx: usize,
    ny: usize,
    ell: f64,
    parity: Option<Parity>,
    values: Vec<f64>,
}

impl TryFrom<RawField> for GridField {
    type Error = WeightError;
    fn try_from(r: RawField) -> Result<Self, WeightError> {
        GridField::from_cells(Grid::new(r.nx, r.ny)?, r.ell, r.parity, r.values)
    }
}

impl From<GridField> for RawField {
    fn from(f: GridField) -> Self {
        RawField {
            nx: f.grid.nx,
            ny: f.grid.ny,
            ell: f.ell,
            parity: f.parity,
            values: f.values,
        }
    }
}

impl GridField {
    pub fn from_cells(grid: Grid, ell: f64, parity: Option<Parity>, values: Vec<f64>) -> Result<Self, WeightError> {
        if !(ell.is_finite() && ell > 0.0) {
            return Err(WeightError::InvalidParameter(format!("ell = {ell}")));
        }
        if values.len() != grid.n_cells() {
            return Err(WeightError::FieldSize {
                expected: grid.n_cells(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(WeightError::NonFiniteField);
        }
        let f = Self {
            grid,
            ell,
            parity,
            values,
        };
        if let Some(p) = parity {
            let residual = f.parity_residual(p);
            let scale = f.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
            if residual > 1e-10 * scale {
                return Err(WeightError::FieldParity { parity: p, residual });
            }
        }
        Ok(f)
    }

    /// Samples `f` at cell centers. With a parity, only `y > 0` is sampled
    /// and the lower half is mirrored.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Grid, ell: f64, parity: Option<Parity>, f: F) -> Self {
        let xs = grid.x_centers();
        let ys = grid.y_centers(ell);
        let cy = grid.cells_y();
        let mut values = vec![0.0; grid.n_cells()];
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                let v = match parity {
                    None => f(x, y),
                    Some(_) if j >= cy / 2 => f(x, y),
                    Some(_) => continue,
                };
                values[i * cy + j] = v;
            }
            if let Some(p) = parity {
                let sign = if p == Parity::Even { 1.0 } else { -1.0 };
                for j in 0..cy / 2 {
                    values[i * cy + j] = sign * values[i * cy + (cy - 1 - j)];
                }
            }
        }
        Self {
            grid,
            ell,
            parity,
            values,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn parity(&self) -> Option<Parity> {
        self.parity
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.cells_y() + j]
    }

    pub fn cell_area(&self) -> f64 {
        (PI / self.grid.cells_x() as f64) * (2.0 * self.ell / self.grid.cells_y() as f64)
    }

    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let (i, j) = self.grid.locate(x, y, self.ell);
        self.get(i, j)
    }

    /// `max |f(x, y) ∓ f(x, -y)|` over cell pairs.
    pub fn parity_residual(&self, parity: Parity) -> f64 {
        let cy = self.grid.cells_y();
        let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
        let mut r = 0.0f64;
        for i in 0..self.grid.cells_x() {
            for j in 0..cy / 2 {
                let a = self.values[i * cy + j];
                let b = self.values[i * cy + cy - 1 - j];
                r = r.max((a - sign * b).abs());
            }
        }
        r
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F, parity: Option<Parity>) -> Result<Self, WeightError> {
        Self::from_cells(self.grid, self.ell, parity, self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Sublevel threshold of a sampled field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub t: f64,
    /// Fraction of the cells with value exactly `t` assigned to the
    /// sublevel set, so that its area hits the target exactly.
    pub tie_fraction: f64,
    /// Constant field, or `t = 0`.
    pub degenerate: bool,
}

/// `t = sup{s : |{field < s}| < target}` with grid measure. Cells with
/// value `< t` lie in the set, cells equal to `t` contribute the fraction
/// needed to reach `target` exactly.
pub fn threshold_for_area(field: &GridField, target_area: f64) -> Result<Threshold, WeightError> {
    let area = PI * 2.0 * field.ell;
    if !(target_area > 0.0 && target_area < area) {
        return Err(WeightError::InvalidTarget {
            target: target_area,
            area,
        });
    }
    let cell = field.cell_area();
    let mut sorted: Vec<f64> = field.values.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut start = 0;
    let mut below = 0.0;
    while start < n {
        let v = sorted[start];
        let mut end = start + 1;
        while end < n && sorted[end] == v {
            end += 1;
        }
        let group = (end - start) as f64 * cell;
        if below + group >= target_area || end == n {
            let tie_fraction = ((target_area - below) / group).clamp(0.0, 1.0);
            let degenerate = sorted[0] == sorted[n - 1] || v == 0.0;
            return Ok(Threshold {
                t: v,
                tie_fraction,
                degenerate,
            });
        }
        below += group;
        start = end;
    }
    unreachable!("non-empty field")
}

/// Tensor partition of Ω with one density value per rectangle,
/// stored x-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    pub values: Vec<f64>,
}

impl Partition {
    pub fn cells_x(&self) -> usize {
        self.x_edges.len() - 1
    }

    pub fn cells_y(&self) -> usize {
        self.y_edges.len() - 1
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.cells_y() + iy]
    }

    pub fn cell_area(&self, ix: usize, iy: usize) -> f64 {
        (self.x_edges[ix + 1] - self.x_edges[ix]) * (self.y_edges[iy + 1] - self.y_edges[iy])
    }

    /// `∫ g(p)` over Ω.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let mut acc = 0.0;
        for ix in 0..self.cells_x() {
            for iy in 0..self.cells_y() {
                acc += g(self.value(ix, iy)) * self.cell_area(ix, iy);
            }
        }
        acc
    }
}

/// Sorted breakpoints of `intervals` clipped to `(a, b)`, with `a` and `b`
/// as end edges.
fn edges_from(intervals: &[Interval], a: f64, b: f64) -> Vec<f64> {
    let mut e = vec![a, b];
    for i in intervals {
        for v in [i.lo, i.hi] {
            if v > a && v < b {
                e.push(v);
            }
        }
    }
    e.sort_by(f64::total_cmp);
    e.dedup();
    e
}

fn midpoints(edges: &[f64]) -> impl Iterator<Item = f64> + '_ {
    edges.windows(2).map(|w| 0.5 * (w[0] + w[1]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "parameters", rename_all = "snake_case")]
pub enum Shape {
    Uniform,
    XBands {
        intervals: Vec<Interval>,
        inside: f64,
        outside: f64,
    },
    YBands {
        intervals: Vec<Interval>,
        inside: f64,
        outside: f64,
    },
    Cross {
        x_intervals: Vec<Interval>,
        y_intervals: Vec<Interval>,
        rule: CombineRule,
        inside: f64,
        outside: f64,
    },
    Sublevel {
        field: GridField,
        threshold: f64,
        inside: f64,
        outside: f64,
        tie_fraction: f64,
    },
}

/// A density together with the bounds of the class it is meant to lie in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    #[serde(flatten)]
    pub shape: Shape,
    pub alpha: f64,
    pub beta: f64,
}

fn sublevel_value(v: f64, t: f64, inside: f64, outside: f64, tie_fraction: f64) -> f64 {
    if v < t {
        inside
    } else if v == t {
        let mixed = outside + tie_fraction * (inside - outside);
        mixed.clamp(inside.min(outside), inside.max(outside))
    } else {
        outside
    }
}

impl Weight {
    pub fn uniform(cfg: &PlateConfig) -> Self {
        Self {
            shape: Shape::Uniform,
            alpha: cfg.alpha,
            beta: cfg.beta,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match &self.shape {
            Shape::Uniform => 1.0,
            Shape::XBands {
                intervals,
                inside,
                outside,
            } => {
                if in_any(intervals, x) {
                    *inside
                } else {
                    *outside
                }
            }
            Shape::YBands {
                intervals,
                inside,
                outside,
            } => {
                if in_any(intervals, y) {
                    *inside
                } else {
                    *outside
                }
            }
            Shape::Cross {
                x_intervals,
                y_intervals,
                rule,
                inside,
                outside,
            } => {
                let (a, b) = (in_any(x_intervals, x), in_any(y_intervals, y));
                let hit = match rule {
                    CombineRule::Union => a || b,
                    CombineRule::Intersection => a && b,
                };
                if hit {
                    *inside
                } else {
                    *outside
                }
            }
            Shape::Sublevel {
                field,
                threshold,
                inside,
                outside,
                tie_fraction,
            } => sublevel_value(field.sample(x, y), *threshold, *inside, *outside, *tie_fraction),
        }
    }

    /// Rectangles on which the weight is constant.
    pub fn partition(&self, ell: f64) -> Partition {
        let full_x = vec![0.0, PI];
        let full_y = vec![-ell, ell];
        let (x_edges, y_edges) = match &self.shape {
            Shape::Uniform => (full_x, full_y),
            Shape::XBands { intervals, .. } => (edges_from(intervals, 0.0, PI), full_y),
            Shape::YBands { intervals, .. } => (full_x, edges_from(intervals, -ell, ell)),
            Shape::Cross {
                x_intervals,
                y_intervals,
                ..
            } => (edges_from(x_intervals, 0.0, PI), edges_from(y_intervals, -ell, ell)),
            Shape::Sublevel {
                field,
                threshold,
                inside,
                outside,
                tie_fraction,
            } => {
                let g = field.grid();
                let values = field
                    .values()
                    .iter()
                    .map(|&v| sublevel_value(v, *threshold, *inside, *outside, *tie_fraction))
                    .collect();
                return Partition {
                    x_edges: g.x_edges(),
                    y_edges: g.y_edges(field.ell()),
                    values,
                };
            }
        };
        let mut values = Vec::with_capacity((x_edges.len() - 1) * (y_edges.len() - 1));
        for x in midpoints(&x_edges) {
            for y in midpoints(&y_edges) {
                values.push(self.eval(x, y));
            }
        }
        Partition {
            x_edges,
            y_edges,
            values,
        }
    }

    /// Density value at each cell center of `grid`. Exact for weights whose
    /// jumps lie on grid lines.
    pub fn grid_values(&self, grid: Grid, ell: f64) -> Vec<f64> {
        if let Shape::Sublevel { field, .. } = &self.shape {
            if field.grid() == grid {
                return self.partition(ell).values;
            }
        }
        let xs = grid.x_centers();
        let ys = grid.y_centers(ell);
        let mut out = Vec::with_capacity(grid.n_cells());
        for &x in &xs {
            for &y in &ys {
                out.push(self.eval(x, y));
            }
        }
        out
    }

    pub fn mass(&self, ell: f64) -> f64 {
        self.partition(ell).integrate(|p| p)
    }

    fn is_analytic(&self) -> bool {
        !matches!(self.shape, Shape::Sublevel { .. })
    }
}

/// Overlap lengths `(field cell, partition cell, length)` of two sorted edge
/// lists covering the same interval.
fn overlaps(a: &[f64], b: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    let (mut i, mut k) = (0, 0);
    while i + 1 < a.len() && k + 1 < b.len() {
        let lo = a[i].max(b[k]);
        let hi = a[i + 1].min(b[k + 1]);
        if hi > lo {
            out.push((i, k, hi - lo));
        }
        if a[i + 1] < b[k + 1] {
            i += 1;
        } else {
            k += 1;
        }
    }
    out
}

/// `∫_Ω p f` for a cell-constant field `f`, exact in `p`.
pub fn weighted_integral(w: &Weight, field: &GridField) -> f64 {
    let g = field.grid();
    let ell = field.ell();
    let part = w.partition(ell);
    let ox = overlaps(&g.x_edges(), &part.x_edges);
    let oy = overlaps(&g.y_edges(ell), &part.y_edges);
    let mut acc = 0.0;
    for &(i, ix, lx) in &ox {
        for &(j, iy, ly) in &oy {
            acc += field.get(i, j) * part.value(ix, iy) * lx * ly;
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub bound_violations: usize,
    pub max_bound_excess: f64,
    pub symmetry_residual: f64,
    /// `(∫p - |Ω|) / |Ω|`
    pub mass_error: f64,
    pub passes: bool,
}

pub const MASS_TOL: f64 = 1e-6;

pub fn validate(w: &Weight, cfg: &PlateConfig) -> MembershipReport {
    let ell = cfg.ell;
    let part = w.partition(ell);
    let mut bound_violations = 0;
    let mut max_bound_excess = 0.0f64;
    for &v in &part.values {
        let excess = (w.alpha - v).max(v - w.beta);
        if excess > 0.0 || !v.is_finite() {
            bound_violations += 1;
            max_bound_excess = max_bound_excess.max(excess);
        }
    }
    let mut symmetry_residual = 0.0f64;
    let ys: Vec<f64> = midpoints(&part.y_edges).collect();
    for x in midpoints(&part.x_edges) {
        for &y in &ys {
            symmetry_residual = symmetry_residual.max((w.eval(x, y) - w.eval(x, -y)).abs());
        }
    }
    let area = cfg.area();
    let mass_error = (part.integrate(|p| p) - area) / area;
    let sym_tol = if w.is_analytic() { 0.0 } else { 1e-10 };
    let ell_ok = match &w.shape {
        Shape::Sublevel { field, .. } => field.ell() == ell,
        _ => true,
    };
    MembershipReport {
        bound_violations,
        max_bound_excess,
        symmetry_residual,
        mass_error,
        passes: ell_ok
            && bound_violations == 0
            && symmetry_residual <= sym_tol
            && mass_error.abs() <= MASS_TOL,
    }
}

/// Fraction of Ω carrying `β` in a two-phase weight of mean one.
pub fn beta_fraction(cfg: &PlateConfig) -> f64 {
    (1.0 - cfg.alpha) / (cfg.beta - cfg.alpha)
}

/// `β` on `j` bands centered at `π(2h-1)/(2j)`, `α` elsewhere.
pub fn make_pbar_j(j: u32, cfg: &PlateConfig) -> Weight {
    make_pbar_j_scaled(j, 1.0, cfg)
}

fn pbar_intervals(j: u32, scale: f64, cfg: &PlateConfig) -> Vec<Interval> {
    let jf = j as f64;
    let half = scale * (PI / jf) * beta_fraction(cfg) / 2.0;
    (1..=j)
        .map(|h| {
            let c = PI * (2 * h - 1) as f64 / (2.0 * jf);
            Interval::new(c - half, c + half)
        })
        .collect()
}

fn make_pbar_j_scaled(j: u32, scale: f64, cfg: &PlateConfig) -> Weight {
    assert!(j >= 1, "j must be positive");
    Weight {
        shape: Shape::XBands {
            intervals: pbar_intervals(j, scale, cfg),
            inside: cfg.beta,
            outside: cfg.alpha,
        },
        alpha: cfg.alpha,
        beta: cfg.beta,
    }
}

/// Threshold `t_j` with `|{sin⁴(jx) ≤ t_j}| = (β-1)/(β-α)|Ω|`, the same for
/// every `j`.
pub fn sin4_threshold(cfg: &PlateConfig) -> f64 {
    let a = PI * (cfg.beta - 1.0) / (2.0 * (cfg.beta - cfg.alpha));
    a.sin().powi(4)
}

/// `α` on `{sin⁴(jx) ≤ t_j}`, `β` on the complement, as exact x-bands.
pub fn make_pj_sin4(j: u32, cfg: &PlateConfig) -> Weight {
    assert!(j >= 1, "j must be positive");
    let jf = j as f64;
    let a = sin4_threshold(cfg).powf(0.25).asin();
    let intervals = (1..=j)
        .map(|h| Interval::new((h - 1) as f64 * PI / jf + a / jf, h as f64 * PI / jf - a / jf))
        .collect();
    Weight {
        shape: Shape::XBands {
            intervals,
            inside: cfg.beta,
            outside: cfg.alpha,
        },
        alpha: cfg.alpha,
        beta: cfg.beta,
    }
}

/// `β` on the mid-line strip `|y| < ℓ(1-α)/(β-α)`, `α` elsewhere.
pub fn make_breve_p(cfg: &PlateConfig) -> Weight {
    let w = cfg.ell * beta_fraction(cfg);
    Weight {
        shape: Shape::YBands {
            intervals: vec![Interval::new(-w, w)],
            inside: cfg.beta,
            outside: cfg.alpha,
        },
        alpha: cfg.alpha,
        beta: cfg.beta,
    }
}

/// `α` on the central strip `|x - π/2| < π(β-1)/(2(β-α))`, `β` near the
/// short edges.
pub fn make_doublebar_p(cfg: &PlateConfig) -> Weight {
    let h = PI * (cfg.beta - 1.0) / (2.0 * (cfg.beta - cfg.alpha));
    Weight {
        shape: Shape::XBands {
            intervals: vec![Interval::new(PI / 2.0 - h, PI / 2.0 + h)],
            inside: cfg.alpha,
            outside: cfg.beta,
        },
        alpha: cfg.alpha,
        beta: cfg.beta,
    }
}

fn tilde_shape(s: f64, cfg: &PlateConfig) -> Shape {
    let w = s * cfg.ell * beta_fraction(cfg);
    Shape::Cross {
        x_intervals: pbar_intervals(10, s, cfg),
        y_intervals: vec![Interval::new(-w, w)],
        rule: CombineRule::Union,
        inside: cfg.beta,
        outside: cfg.alpha,
    }
}

/// Union of the ten x-bands of `p̄₁₀` and the strip of `p̆`, both narrowed
/// by a common factor so the mass is `|Ω|`.
pub fn make_tilde_p(cfg: &PlateConfig) -> Weight {
    let area = cfg.area();
    let mass = |s: f64| {
        let w = Weight {
            shape: tilde_shape(s, cfg),
            alpha: cfg.alpha,
            beta: cfg.beta,
        };
        w.mass(cfg.ell) - area
    };
    let s = find_root(mass, Bracket::new(1e-9, 1.0).expect("valid"), 1e-15).expect("mass changes sign on (0, 1]");
    Weight {
        shape: tilde_shape(s, cfg),
        alpha: cfg.alpha,
        beta: cfg.beta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PlateConfig {
        PlateConfig::reference()
    }

    #[test]
    fn grid_geometry_is_symmetric() {
        let g = Grid::new(11, 7).unwrap();
        let ell = 0.3;
        let ye = g.y_edges(ell);
        let yc = g.y_centers(ell);
        for j in 0..ye.len() {
            assert_eq!(ye[j], -ye[ye.len() - 1 - j]);
        }
        for j in 0..yc.len() {
            assert_eq!(yc[j], -yc[yc.len() - 1 - j]);
        }
        assert!(Grid::new(10, 8).is_err());
        assert_eq!(g.locate(0.0, -ell, ell), (0, 0));
        assert_eq!(g.locate(PI, ell, ell), (9, 5));
        assert_eq!(g.locate(1e-9, 0.0, ell).1, 3);
    }

    #[test]
    fn field_parity_is_checked() {
        let g = Grid::new(9, 5).unwrap();
        let even = GridField::from_fn(g, 1.0, Some(Parity::Even), |x, y| x + y * y);
        assert_eq!(even.parity_residual(Parity::Even), 0.0);
        let odd = GridField::from_fn(g, 1.0, Some(Parity::Odd), |x, y| x * y);
        assert_eq!(odd.parity_residual(Parity::Odd), 0.0);
        let bad = GridField::from_fn(g, 1.0, None, |x, y| x + y);
        assert!(matches!(
            GridField::from_cells(g, 1.0, Some(Parity::Even), bad.values().to_vec()),
            Err(WeightError::FieldParity { .. })
        ));
    }

    #[test]
    fn validate_examples() {
        let c = cfg();
        let r = validate(&Weight::uniform(&c), &c);
        assert!(r.passes);
        assert_eq!(r.mass_error, 0.0);
        let good = Weight {
            shape: Shape::XBands {
                intervals: vec![Interval::new(1.0, 1.0 + PI / 2.0)],
                inside: 1.5,
                outside: 0.5,
            },
            alpha: 0.5,
            beta: 1.5,
        };
        assert!(validate(&good, &c).passes);
        let short = Weight {
            shape: Shape::XBands {
                intervals: vec![Interval::new(1.0, 1.0 + PI / 3.0)],
                inside: 1.5,
                outside: 0.5,
            },
            alpha: 0.5,
            beta: 1.5,
        };
        let r = validate(&short, &c);
        assert!(!r.passes);
        // (π/3 - π/2)(β - α)·2ℓ / |Ω|
        let want = -PI / 6.0 * 2.0 * c.ell / c.area();
        assert!((r.mass_error - want).abs() < 1e-14);
    }

    #[test]
    fn pbar_geometry() {
        let c = cfg();
        let w = make_pbar_j(1, &c);
        match &w.shape {
            Shape::XBands { intervals, .. } => {
                assert!((intervals[0].lo - PI / 4.0).abs() < 1e-15);
                assert!((intervals[0].hi - 3.0 * PI / 4.0).abs() < 1e-15);
            }
            _ => unreachable!(),
        }
        assert_eq!(w.eval(PI / 2.0, 0.0), 1.5);
        let w10 = make_pbar_j(10, &c);
        if let Shape::XBands { intervals, .. } = &w10.shape {
            assert_eq!(intervals.len(), 10);
            for i in intervals {
                assert!((i.len() - PI / 10.0 * 0.5).abs() < 1e-14);
            }
        }
        for j in 1..=12 {
            let r = validate(&make_pbar_j(j, &c), &c);
            assert!(r.passes && r.mass_error.abs() <= 1e-12, "{j}: {r:?}");
        }
    }

    #[test]
    fn sin4_threshold_closed_form() {
        let c = cfg();
        assert!((sin4_threshold(&c) - 0.25).abs() < 1e-15);
        // At the default bounds the sin⁴ weight is p̄_j.
        for j in 2..=10 {
            let a = make_pj_sin4(j, &c);
            let b = make_pbar_j(j, &c);
            for i in 0..997 {
                let x = PI * (i as f64 + 0.31) / 997.0;
                assert_eq!(a.eval(x, 0.0), b.eval(x, 0.0), "j={j} x={x}");
            }
            assert!(validate(&a, &c).mass_error.abs() < 1e-12);
        }
        let skew = PlateConfig::new(c.ell, 0.2, 0.3, 2.0, 30).unwrap();
        assert!(validate(&make_pj_sin4(4, &skew), &skew).mass_error.abs() < 1e-12);
    }

    #[test]
    fn breve_doublebar_tilde() {
        let c = cfg();
        let b = make_breve_p(&c);
        assert!(validate(&b, &c).passes);
        assert_eq!(b.eval(1.0, c.ell), 0.5);
        assert_eq!(b.eval(1.0, -c.ell), 0.5);
        assert_eq!(b.eval(1.0, 0.0), 1.5);
        let d = make_doublebar_p(&c);
        assert!(validate(&d, &c).passes);
        assert_eq!(d.eval(PI / 2.0, 0.0), 0.5);
        assert_eq!(d.eval(0.1, 0.0), 1.5);
        let t = make_tilde_p(&c);
        let r = validate(&t, &c);
        assert!(r.passes && r.mass_error.abs() < 1e-12, "{r:?}");
        // Union of two independent fractions s·q: 2sq - (sq)² = q.
        let q = beta_fraction(&c);
        let s = (1.0 - (1.0 - q).sqrt()) / q;
        assert!((s - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        if let Shape::Cross { y_intervals, .. } = &t.shape {
            assert!((y_intervals[0].hi - s * c.ell * q).abs() < 1e-12 * c.ell);
        }
    }

    #[test]
    fn threshold_examples() {
        let c = cfg();
        let g = DEFAULT_GRID;
        let f = GridField::from_fn(g, c.ell, Some(Parity::Even), |x, _| (5.0 * x).sin().powi(4));
        let th = threshold_for_area(&f, c.area() / 2.0).unwrap();
        assert!((th.t - 0.25).abs() < 0.01, "{}", th.t);
        assert!(!th.degenerate);
        let small = threshold_for_area(&f, 1e-9).unwrap();
        let min = f.values().iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(small.t, min);
        let flat = GridField::from_fn(g, c.ell, Some(Parity::Even), |_, _| 2.0);
        let th = threshold_for_area(&flat, c.area() / 3.0).unwrap();
        assert!(th.degenerate && th.t == 2.0);
        assert!(threshold_for_area(&f, 0.0).is_err());
        assert!(threshold_for_area(&f, c.area()).is_err());
    }

    #[test]
    fn sublevel_weight_has_exact_mass() {
        let c = cfg();
        let f = GridField::from_fn(Grid::new(41, 9).unwrap(), c.ell, Some(Parity::Even), |x, y| {
            (x * 3.0).sin().powi(2) + (y / c.ell).powi(2)
        });
        let target = beta_fraction(&c) * c.area();
        let th = threshold_for_area(&f, target).unwrap();
        let w = Weight {
            shape: Shape::Sublevel {
                field: f,
                threshold: th.t,
                inside: c.beta,
                outside: c.alpha,
                tie_fraction: th.tie_fraction,
            },
            alpha: c.alpha,
            beta: c.beta,
        };
        let r = validate(&w, &c);
        assert!(r.passes && r.mass_error.abs() < 1e-13, "{r:?}");
        assert_eq!(r.symmetry_residual, 0.0);
    }

    #[test]
    fn json_round_trip() {
        let c = cfg();
        let f = GridField::from_fn(Grid::new(5, 3).unwrap(), c.ell, Some(Parity::Even), |x, _| x.sin() / 3.0);
        for w in [
            Weight::uniform(&c),
            make_pbar_j(3, &c),
            make_breve_p(&c),
            make_tilde_p(&c),
            Weight {
                shape: Shape::Sublevel {
                    field: f,
                    threshold: 0.1,
                    inside: 1.5,
                    outside: 0.5,
                    tie_fraction: 0.25,
                },
                alpha: 0.5,
                beta: 1.5,
            },
        ] {
            let s = serde_json::to_string(&w).unwrap();
            let v: serde_json::Value = serde_json::from_str(&s).unwrap();
            assert!(v.get("variant").is_some() && v.get("alpha").is_some());
            let back: Weight = serde_json::from_str(&s).unwrap();
            assert_eq!(back, w);
        }
        let uni: Weight = serde_json::from_str(r#"{"variant":"uniform","alpha":0.5,"beta":1.5}"#).unwrap();
        assert_eq!(uni.shape, Shape::Uniform);
    }
}
