//! Bang-bang density optimization by repeated rearrangement.
//!
//! Minimizing `μ_j` puts `β` where the current `u²` is large
//! ([`rearrange_max`]); maximizing `ν₁` puts `β` where `u²` is small
//! ([`rearrange_min`]). Both act on cell means of `u²` computed from the
//! same cell integrals the Galerkin assembly uses.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galerkin::{solve_generalized, solve_weighted, GalerkinError, MassAssembler, ParitySolution};
use crate::spectrum::{build_spectrum, HomSpectrum, Parity, PlateConfig, SpectrumError};
use crate::weights::{
    make_breve_p, make_doublebar_p, make_pbar_j, make_tilde_p, threshold_for_area, validate, Grid, GridField, Shape,
    Threshold, Weight, WeightError,
};
use crate::SymMatrixF64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Galerkin(#[from] GalerkinError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("index j = {j} outside 1..={n}")]
    InvalidIndex { j: usize, n: usize },
    #[error("field must be non-negative and y-even")]
    InvalidField,
    #[error("initial weight is not constant on grid cells (mass error {mass_error:e})")]
    NotGridAligned { mass_error: f64 },
    #[error("initial weight is not admissible: {0}")]
    Inadmissible(String),
}

/// Relative slack allowed in the monotone-descent check.
pub const MONOTONE_SLACK: f64 = 1e-12;
/// Residual below which the tracked eigenfunction counts as lying in the
/// span of the lower ones.
pub const SPAN_RESIDUAL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_EPSILON: f64 = 1e-4;
/// Fixed-point stop: symmetric difference of consecutive sets below this
/// fraction of `|Ω|`.
pub const SYM_DIFF_STOP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rearrangement {
    pub weight: Weight,
    pub threshold: Threshold,
}

fn check_field(field: &GridField) -> Result<(), OptimizeError> {
    if field.values().iter().any(|&v| v < 0.0) || field.parity_residual(Parity::Even) > 1e-10 {
        return Err(OptimizeError::InvalidField);
    }
    Ok(())
}

fn sublevel(field: &GridField, target: f64, inside: f64, outside: f64, cfg: &PlateConfig) -> Result<Rearrangement, OptimizeError> {
    check_field(field)?;
    let threshold = threshold_for_area(field, target)?;
    let field = if field.parity() == Some(Parity::Even) {
        field.clone()
    } else {
        field.map(|v| v, Some(Parity::Even))?
    };
    Ok(Rearrangement {
        weight: Weight {
            shape: Shape::Sublevel {
                field,
                threshold: threshold.t,
                inside,
                outside,
                tie_fraction: threshold.tie_fraction,
            },
            alpha: cfg.alpha,
            beta: cfg.beta,
        },
        threshold,
    })
}

/// Minimizer of `∫ p u²`: `β` on `{u² ≤ t}` of area `(1-α)/(β-α)|Ω|`.
pub fn rearrange_min(field: &GridField, cfg: &PlateConfig) -> Result<Rearrangement, OptimizeError> {
    let target = (1.0 - cfg.alpha) / (cfg.beta - cfg.alpha) * cfg.area();
    sublevel(field, target, cfg.beta, cfg.alpha, cfg)
}

/// Maximizer of `∫ p u²`: `α` on `{u² ≤ t}` of area `(β-1)/(β-α)|Ω|`.
pub fn rearrange_max(field: &GridField, cfg: &PlateConfig) -> Result<Rearrangement, OptimizeError> {
    let target = (cfg.beta - 1.0) / (cfg.beta - cfg.alpha) * cfg.area();
    sublevel(field, target, cfg.alpha, cfg.beta, cfg)
}

/// Homogeneous basis and per-cell integrals on a fixed grid.
pub struct GridContext {
    pub cfg: PlateConfig,
    pub grid: Grid,
    pub spectrum: HomSpectrum,
    even: MassAssembler,
    odd: MassAssembler,
}

impl GridContext {
    pub fn new(cfg: &PlateConfig, grid: Grid) -> Result<Self, OptimizeError> {
        let spectrum = build_spectrum(cfg)?;
        Ok(Self::with_spectrum(spectrum, grid))
    }

    pub fn with_spectrum(spectrum: HomSpectrum, grid: Grid) -> Self {
        let cfg = spectrum.cfg;
        let n = cfg.n_modes;
        let (even, odd) = rayon::join(
            || MassAssembler::for_grid(&spectrum.mu[..n], grid, cfg.ell),
            || MassAssembler::for_grid(&spectrum.nu[..n], grid, cfg.ell),
        );
        Self {
            cfg,
            grid,
            spectrum,
            even,
            odd,
        }
    }

    pub fn assembler(&self, parity: Parity) -> &MassAssembler {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    fn hom(&self, parity: Parity) -> Vec<f64> {
        self.spectrum.pairs(parity)[..self.cfg.n_modes].iter().map(|p| p.lambda).collect()
    }

    /// Mass matrix and eigenpairs for cell values on the grid.
    pub fn solve(&self, parity: Parity, values: &[f64]) -> Result<(SymMatrixF64, ParitySolution), OptimizeError> {
        let c = self.assembler(parity).assemble(values)?;
        let sol = solve_generalized(&c, &self.hom(parity))?;
        Ok((c, sol))
    }

    /// Cell means of `u²` as a y-even field.
    pub fn square_field(&self, parity: Parity, coeffs: &[f64]) -> Result<GridField, OptimizeError> {
        let mut v = self.assembler(parity).cell_mean_square(coeffs);
        // Cell integrals of u² are mirror images up to rounding; enforce it.
        let cy = self.grid.cells_y();
        for i in 0..self.grid.cells_x() {
            for j in 0..cy / 2 {
                let m = 0.5 * (v[i * cy + j] + v[i * cy + cy - 1 - j]);
                v[i * cy + j] = m;
                v[i * cy + cy - 1 - j] = m;
            }
        }
        Ok(GridField::from_cells(self.grid, self.cfg.ell, Some(Parity::Even), v)?)
    }

    fn aligned_values(&self, w: &Weight) -> Result<Vec<f64>, OptimizeError> {
        let report = validate(w, &self.cfg);
        if !report.passes {
            return Err(OptimizeError::Inadmissible(format!("{report:?}")));
        }
        let values = w.grid_values(self.grid, self.cfg.ell);
        let area = self.cfg.area();
        let mass: f64 = values.iter().zip(self.even.cell_areas()).map(|(v, a)| v * a).sum();
        let mass_error = (mass - w.mass(self.cfg.ell)) / area;
        if mass_error.abs() > 1e-12 {
            return Err(OptimizeError::NotGridAligned { mass_error });
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    MinMu { j: usize },
    MaxNu1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIters,
    Degenerate,
    NoDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub index: usize,
    pub eigenvalue: f64,
    /// Position (0-based) of the tracked eigenvalue in the current spectrum.
    pub mode_index: usize,
    /// Threshold that produced this weight; `None` for the initial weight.
    pub threshold: Option<Threshold>,
    /// Distance of the tracked eigenfunction from the span of the lower
    /// ones, relative to its norm.
    pub projection_residual: Option<f64>,
    /// Symmetric difference to the next set, as a fraction of `|Ω|`.
    pub sym_diff: Option<f64>,
    pub weight: Weight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub target: Target,
    pub epsilon: f64,
    pub iterates: Vec<Iterate>,
    /// Candidate step that would have raised the eigenvalue.
    pub rejected: Option<Iterate>,
    pub stop_reason: StopReason,
}

impl OptimizationTrace {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.iterates.iter().map(|i| i.eigenvalue).collect()
    }

    pub fn last(&self) -> &Iterate {
        self.iterates.last().expect("trace has at least one iterate")
    }

    pub fn is_monotone_non_increasing(&self) -> bool {
        self.iterates
            .windows(2)
            .all(|w| w[1].eigenvalue <= w[0].eigenvalue * (1.0 + MONOTONE_SLACK))
    }
}

/// `|⟨u, v_k⟩_p|` for every new eigenvector `v_k`, and the residual of `u`
/// after projecting out the first `lower` of them.
fn overlaps(c: &SymMatrixF64, sol: &ParitySolution, u: &[f64], lower: usize) -> (Vec<f64>, f64) {
    let cu = c.mul_vec(u);
    let dots: Vec<f64> = sol
        .coeffs
        .iter()
        .map(|a| a.iter().zip(&cu).map(|(x, y)| x * y).sum::<f64>())
        .collect();
    let norm2: f64 = u.iter().zip(&cu).map(|(x, y)| x * y).sum();
    let proj2: f64 = dots[..lower].iter().map(|d| d * d).sum();
    let residual = ((norm2 - proj2).max(0.0) / norm2).sqrt();
    (dots.iter().map(|d| d.abs()).collect(), residual)
}

fn argmax_from(v: &[f64], start: usize) -> usize {
    let mut best = start;
    for k in start..v.len() {
        if v[k] > v[best] {
            best = k;
        }
    }
    best
}

/// Iteratively lowers `μ_j` starting from a weight whose jumps lie on the
/// grid lines of `ctx`.
///
/// The j-th eigenfunction is followed across iterations by its largest
/// `p`-weighted overlap with the previous one, among indices `≥ j - 1`.
/// Searching below that lets the run slide onto lower modes.
///
/// For `j > 1` a rearrangement step need not lower `μ_j`: the bound it
/// gives is the quotient of the previous eigenfunction with its lower
/// components removed. A step that raises the eigenvalue is not taken; it
/// is stored in [`OptimizationTrace::rejected`] and the run stops.
pub fn minimize_mu_j(
    ctx: &GridContext,
    j: usize,
    epsilon: f64,
    max_iters: usize,
    initial: &Weight,
) -> Result<OptimizationTrace, OptimizeError> {
    let n = ctx.cfg.n_modes;
    if j == 0 || j > n {
        return Err(OptimizeError::InvalidIndex { j, n });
    }
    let mut values = ctx.aligned_values(initial)?;
    let mut weight = initial.clone();
    let mut threshold = None;
    let mut iterates = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    let mut rejected = None;
    let mut i = 0;
    let stop_reason = loop {
        let (c, sol) = ctx.solve(Parity::Even, &values)?;
        let (idx, residual) = match &prev {
            None => (j - 1, None),
            Some(u) => {
                let (ov, residual) = overlaps(&c, &sol, u, j - 1);
                (argmax_from(&ov, j - 1), Some(residual))
            }
        };
        let mu = sol.values[idx];
        iterates.push(Iterate {
            index: i,
            eigenvalue: mu,
            mode_index: idx,
            threshold,
            projection_residual: residual,
            sym_diff: None,
            weight: weight.clone(),
        });
        if i > 0 {
            let before = iterates[i - 1].eigenvalue;
            if mu > before * (1.0 + MONOTONE_SLACK) {
                rejected = iterates.pop();
                break StopReason::NoDescent;
            }
            if before - mu < epsilon * before {
                break StopReason::Converged;
            }
        }
        if i == max_iters {
            break StopReason::MaxIters;
        }
        let field = ctx.square_field(Parity::Even, &sol.coeffs[idx])?;
        let r = rearrange_max(&field, &ctx.cfg)?;
        if r.threshold.degenerate {
            break StopReason::Degenerate;
        }
        let next = r.weight.partition(ctx.cfg.ell).values;
        if next == values {
            break StopReason::Converged;
        }
        values = next;
        weight = r.weight;
        threshold = Some(r.threshold);
        prev = Some(sol.coeffs[idx].clone());
        i += 1;
    };
    Ok(OptimizationTrace {
        target: Target::MinMu { j },
        epsilon,
        iterates,
        rejected,
        stop_reason,
    })
}

/// Membership of each cell in the `β` phase, in `[0, 1]`.
fn beta_share(values: &[f64], cfg: &PlateConfig) -> Vec<f64> {
    values.iter().map(|v| (v - cfg.alpha) / (cfg.beta - cfg.alpha)).collect()
}

fn sym_diff_fraction(a: &[f64], b: &[f64], areas: &[f64], cfg: &PlateConfig) -> f64 {
    let (sa, sb) = (beta_share(a, cfg), beta_share(b, cfg));
    let d: f64 = sa.iter().zip(&sb).zip(areas).map(|((x, y), ar)| (x - y).abs() * ar).sum();
    d / cfg.area()
}

/// `β` on the sublevel set of `θ₁²`, the square of the first torsional
/// eigenfunction of the homogeneous plate.
pub fn make_p_star(ctx: &GridContext) -> Result<Rearrangement, OptimizeError> {
    let mut e = vec![0.0; ctx.cfg.n_modes];
    e[0] = 1.0;
    let field = ctx.square_field(Parity::Odd, &e)?;
    rearrange_min(&field, &ctx.cfg)
}

/// Sublevel fixed point for `ν₁`, starting from [`make_p_star`].
pub fn maximize_nu1_fixed_point(ctx: &GridContext, max_iters: usize) -> Result<OptimizationTrace, OptimizeError> {
    let start = make_p_star(ctx)?;
    let mut weight = start.weight;
    let mut threshold = Some(start.threshold);
    let mut values = weight.partition(ctx.cfg.ell).values;
    let mut iterates = Vec::new();
    let mut i = 0;
    let stop_reason = loop {
        let (_, sol) = ctx.solve(Parity::Odd, &values)?;
        let field = ctx.square_field(Parity::Odd, &sol.coeffs[0])?;
        let r = rearrange_min(&field, &ctx.cfg)?;
        let next = r.weight.partition(ctx.cfg.ell).values;
        let d = sym_diff_fraction(&values, &next, ctx.assembler(Parity::Odd).cell_areas(), &ctx.cfg);
        iterates.push(Iterate {
            index: i,
            eigenvalue: sol.values[0],
            mode_index: 0,
            threshold,
            projection_residual: None,
            sym_diff: Some(d),
            weight: weight.clone(),
        });
        if r.threshold.degenerate {
            break StopReason::Degenerate;
        }
        if d < SYM_DIFF_STOP {
            break StopReason::Converged;
        }
        if i == max_iters {
            break StopReason::MaxIters;
        }
        values = next;
        weight = r.weight;
        threshold = Some(r.threshold);
        i += 1;
    };
    Ok(OptimizationTrace {
        target: Target::MaxNu1,
        epsilon: SYM_DIFF_STOP,
        iterates,
        rejected: None,
        stop_reason,
    })
}

/// `∫_a^b sin⁴(j x) dx`
fn sin4_integral(j: f64, a: f64, b: f64) -> f64 {
    let f = |x: f64| 3.0 * x / 8.0 - (2.0 * j * x).sin() / (4.0 * j) + (4.0 * j * x).sin() / (32.0 * j);
    f(b) - f(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuBound {
    pub bound: f64,
    /// `‖√w w_m‖²` for the j disjoint humps `w_m = sin²(jx)` on
    /// `((m-1)π/j, mπ/j)`.
    pub norms: Vec<f64>,
    /// Single-function form, when all hump norms agree.
    pub periodic: Option<f64>,
}

/// Upper bound on `μ_j(w)` from the `j` disjoint test functions
/// `sin²(jx)·χ_{((m-1)π/j, mπ/j)}`, each of energy `2j³|Ω|`.
pub fn mu_upper_bound(w: &Weight, j: u32, cfg: &PlateConfig) -> MuBound {
    assert!(j >= 1);
    let jf = j as f64;
    let part = w.partition(cfg.ell);
    let energy = 2.0 * jf.powi(3) * cfg.area();
    let cy = part.cells_y();
    let norms: Vec<f64> = (1..=j)
        .map(|m| {
            let (lo, hi) = ((m - 1) as f64 * PI / jf, m as f64 * PI / jf);
            let mut acc = 0.0;
            for ix in 0..part.cells_x() {
                let a = part.x_edges[ix].max(lo);
                let b = part.x_edges[ix + 1].min(hi);
                if b <= a {
                    continue;
                }
                let sx = sin4_integral(jf, a, b);
                for iy in 0..cy {
                    acc += part.value(ix, iy) * sx * (part.y_edges[iy + 1] - part.y_edges[iy]);
                }
            }
            acc
        })
        .collect();
    let bound = norms.iter().map(|nm| energy / nm).fold(0.0, f64::max);
    let first = norms[0];
    let periodic = if norms.iter().all(|nm| (nm - first).abs() <= 1e-12 * first) {
        let total: f64 = norms.iter().sum();
        Some(jf * energy / total)
    } else {
        None
    };
    MuBound { bound, norms, periodic }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub label: String,
    pub mu: Vec<f64>,
    pub nu1: f64,
    pub nu2: f64,
    /// `ν₁ / μ_{j₀}`
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub j0: usize,
    pub rows: Vec<RatioRow>,
}

/// Number of longitudinal eigenvalues reported per row.
pub const RATIO_MU_COUNT: usize = 12;

pub fn ratio_study(weights: &[(String, Weight)], spectrum: &HomSpectrum) -> Result<RatioReport, OptimizeError> {
    let n = spectrum.cfg.n_modes;
    let j0 = spectrum.j0;
    if j0 == 0 || j0 > n || n < RATIO_MU_COUNT {
        return Err(OptimizeError::InvalidIndex { j: j0.max(RATIO_MU_COUNT), n });
    }
    let rows: Result<Vec<RatioRow>, OptimizeError> = weights
        .par_iter()
        .map(|(label, w)| {
            let gs = solve_weighted(w, spectrum, n)?;
            Ok(RatioRow {
                label: label.clone(),
                mu: gs.mu[..RATIO_MU_COUNT].to_vec(),
                nu1: gs.nu[0],
                nu2: gs.nu[1],
                r: gs.nu[0] / gs.mu[j0 - 1],
            })
        })
        .collect();
    Ok(RatioReport { j0, rows: rows? })
}

/// The six densities compared in the ratio table, in column order.
pub fn ratio_table_weights(ctx: &GridContext) -> Result<Vec<(String, Weight)>, OptimizeError> {
    let cfg = &ctx.cfg;
    Ok(vec![
        ("uniform".into(), Weight::uniform(cfg)),
        ("pbar10".into(), make_pbar_j(10, cfg)),
        ("pstar".into(), make_p_star(ctx)?.weight),
        ("breve".into(), make_breve_p(cfg)),
        ("doublebar".into(), make_doublebar_p(cfg)),
        ("tilde".into(), make_tilde_p(cfg)),
    ])
}
