//! Weighted eigenvalues by Galerkin projection onto the homogeneous
//! eigenbasis.
//!
//! With `u = Σ a_m z_m` the weak problem becomes `D a = μ C a` where
//! `D = diag(λ_m(1))` and `C_nm = ∫ p z_n z_m`. Substituting `a = D^{-1/2} b`
//! gives the standard symmetric problem `M b = (1/μ) b` with
//! `M = D^{-1/2} C D^{-1/2}`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{gauss_legendre, sym_eig, NumericsError};
use crate::spectrum::{HomEigenpair, HomSpectrum, Parity, SpectrumError};
use crate::weights::{Grid, GridField, Partition, Weight, WeightError};
use crate::SymMatrixF64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GalerkinError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("truncation {requested} exceeds the {available} available basis functions")]
    TooFewModes { requested: usize, available: usize },
    #[error("mass matrix has a non-finite entry at ({0}, {1})")]
    QuadratureFailure(usize, usize),
    #[error("mass matrix is not positive definite (eigenvalue {0:e})")]
    SingularMass(f64),
    #[error("cell values: expected {expected}, got {got}")]
    CellCount { expected: usize, got: usize },
}

/// Gauss points per y-panel; panels are at most one decay length wide.
const Y_ORDER: usize = 12;

/// `∫_{x0}^{x1} sin(a x) sin(b x) dx`
fn sin_sin_integral(a: f64, b: f64, x0: f64, x1: f64) -> f64 {
    if a == b {
        let f = |x: f64| x / 2.0 - (2.0 * a * x).sin() / (4.0 * a);
        f(x1) - f(x0)
    } else {
        let (d, s) = (a - b, a + b);
        let f = |x: f64| (d * x).sin() / (2.0 * d) - (s * x).sin() / (2.0 * s);
        f(x1) - f(x0)
    }
}

/// Per-cell factors of the mass matrix on a fixed tensor partition.
///
/// `C_ab = Σ_cells p_c X_c(a, b) Y_c(a, b)`, and `∫_c u² = aᵀ (X_c ∘ Y_c) a`
/// uses the very same factors, so rearrangement and assembly agree exactly.
#[derive(Debug, Clone)]
pub struct MassAssembler {
    n: usize,
    cells_x: usize,
    cells_y: usize,
    pairs: Vec<(usize, usize)>,
    /// pair-major: `x_int[pair * cells_x + ix]`
    x_int: Vec<f64>,
    /// pair-major: `y_int[pair * cells_y + iy]`
    y_int: Vec<f64>,
    areas: Vec<f64>,
}

impl MassAssembler {
    pub fn new(basis: &[HomEigenpair], x_edges: &[f64], y_edges: &[f64]) -> Self {
        let n = basis.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
        let cells_x = x_edges.len() - 1;
        let cells_y = y_edges.len() - 1;

        let mut x_int = vec![0.0; pairs.len() * cells_x];
        for (pi, &(a, b)) in pairs.iter().enumerate() {
            let (ma, mb) = (basis[a].mode.m as f64, basis[b].mode.m as f64);
            for ix in 0..cells_x {
                x_int[pi * cells_x + ix] = sin_sin_integral(ma, mb, x_edges[ix], x_edges[ix + 1]);
            }
        }

        let kmax = basis.iter().map(|p| p.profile.max_wavenumber()).fold(0.0, f64::max);
        let (gx, gw) = gauss_legendre::<f64>(Y_ORDER);
        let y_cols: Vec<Vec<f64>> = (0..cells_y)
            .into_par_iter()
            .map(|iy| {
                let (y0, y1) = (y_edges[iy], y_edges[iy + 1]);
                let panels = (kmax * (y1 - y0)).ceil() as usize + 1;
                let h = (y1 - y0) / panels as f64;
                let mut acc = vec![0.0; pairs.len()];
                let mut phi = vec![0.0; n];
                for p in 0..panels {
                    let c = y0 + h * (p as f64 + 0.5);
                    for (x, w) in gx.iter().zip(&gw) {
                        let y = c + 0.5 * h * x;
                        for (v, b) in phi.iter_mut().zip(basis) {
                            *v = b.profile.value(y);
                        }
                        let wy = 0.5 * h * w;
                        for (slot, &(a, b)) in acc.iter_mut().zip(&pairs) {
                            *slot += wy * phi[a] * phi[b];
                        }
                    }
                }
                acc
            })
            .collect();
        let mut y_int = vec![0.0; pairs.len() * cells_y];
        for (iy, col) in y_cols.iter().enumerate() {
            for (pi, v) in col.iter().enumerate() {
                y_int[pi * cells_y + iy] = *v;
            }
        }

        let mut areas = Vec::with_capacity(cells_x * cells_y);
        for ix in 0..cells_x {
            for iy in 0..cells_y {
                areas.push((x_edges[ix + 1] - x_edges[ix]) * (y_edges[iy + 1] - y_edges[iy]));
            }
        }
        Self {
            n,
            cells_x,
            cells_y,
            pairs,
            x_int,
            y_int,
            areas,
        }
    }

    pub fn for_partition(basis: &[HomEigenpair], part: &Partition) -> Self {
        Self::new(basis, &part.x_edges, &part.y_edges)
    }

    pub fn for_grid(basis: &[HomEigenpair], grid: Grid, ell: f64) -> Self {
        Self::new(basis, &grid.x_edges(), &grid.y_edges(ell))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn n_cells(&self) -> usize {
        self.cells_x * self.cells_y
    }

    pub fn cell_areas(&self) -> &[f64] {
        &self.areas
    }

    /// Mass matrix for density `values` (one per cell, x-major).
    pub fn assemble(&self, values: &[f64]) -> Result<SymMatrixF64, GalerkinError> {
        if values.len() != self.n_cells() {
            return Err(GalerkinError::CellCount {
                expected: self.n_cells(),
                got: values.len(),
            });
        }
        let (cx, cy) = (self.cells_x, self.cells_y);
        let entries: Vec<f64> = (0..self.pairs.len())
            .into_par_iter()
            .map(|pi| {
                let xs = &self.x_int[pi * cx..(pi + 1) * cx];
                let ys = &self.y_int[pi * cy..(pi + 1) * cy];
                let mut acc = 0.0;
                for (ix, xv) in xs.iter().enumerate() {
                    let row = &values[ix * cy..(ix + 1) * cy];
                    let inner: f64 = row.iter().zip(ys).map(|(p, y)| p * y).sum();
                    acc += xv * inner;
                }
                acc
            })
            .collect();
        let mut c = SymMatrixF64::zeros(self.n);
        for (&(a, b), &v) in self.pairs.iter().zip(&entries) {
            if !v.is_finite() {
                return Err(GalerkinError::QuadratureFailure(a, b));
            }
            c.set(a, b, v);
        }
        Ok(c)
    }

    /// `∫_cell u²` for `u = Σ coeffs_m z_m`, x-major.
    pub fn cell_energy(&self, coeffs: &[f64]) -> Vec<f64> {
        let (cx, cy) = (self.cells_x, self.cells_y);
        let w: Vec<f64> = self
            .pairs
            .iter()
            .map(|&(a, b)| if a == b { coeffs[a] * coeffs[a] } else { 2.0 * coeffs[a] * coeffs[b] })
            .collect();
        (0..cx)
            .into_par_iter()
            .flat_map_iter(|ix| {
                let mut out = vec![0.0; cy];
                for (pi, wp) in w.iter().enumerate() {
                    let xv = wp * self.x_int[pi * cx + ix];
                    let ys = &self.y_int[pi * cy..(pi + 1) * cy];
                    for (o, y) in out.iter_mut().zip(ys) {
                        *o += xv * y;
                    }
                }
                out
            })
            .collect()
    }

    /// Cell means of `u²`.
    pub fn cell_mean_square(&self, coeffs: &[f64]) -> Vec<f64> {
        self.cell_energy(coeffs)
            .into_iter()
            .zip(&self.areas)
            .map(|(e, a)| e / a)
            .collect()
    }
}

fn basis(spectrum: &HomSpectrum, parity: Parity, n: usize) -> Result<&[HomEigenpair], GalerkinError> {
    let all = spectrum.pairs(parity);
    if n > all.len() || n == 0 {
        return Err(GalerkinError::TooFewModes {
            requested: n,
            available: all.len(),
        });
    }
    Ok(&all[..n])
}

pub fn assemble_mass(w: &Weight, spectrum: &HomSpectrum, parity: Parity, n: usize) -> Result<SymMatrixF64, GalerkinError> {
    let part = w.partition(spectrum.cfg.ell);
    MassAssembler::for_partition(basis(spectrum, parity, n)?, &part).assemble(&part.values)
}

/// Eigenvalues ascending with coefficient vectors normalized to
/// `aᵀ C a = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParitySolution {
    pub values: Vec<f64>,
    pub coeffs: Vec<Vec<f64>>,
}

/// Solves `D a = μ C a` for `D = diag(hom)`.
pub fn solve_generalized(mass: &SymMatrixF64, hom: &[f64]) -> Result<ParitySolution, GalerkinError> {
    let n = mass.dim();
    let inv_sqrt: Vec<f64> = hom.iter().map(|d| 1.0 / d.sqrt()).collect();
    let m = SymMatrixF64::from_upper_fn(n, |i, j| inv_sqrt[i] * mass.get(i, j) * inv_sqrt[j]);
    let eig = sym_eig(&m)?;
    let mut values = Vec::with_capacity(n);
    let mut coeffs = Vec::with_capacity(n);
    // Largest η gives the smallest μ.
    for k in (0..n).rev() {
        let eta = eig.values[k];
        if !(eta > 0.0) {
            return Err(GalerkinError::SingularMass(eta));
        }
        values.push(1.0 / eta);
        let scale = 1.0 / eta.sqrt();
        let b = eig.vector(k);
        let mut a: Vec<f64> = b.iter().zip(&inv_sqrt).map(|(bi, s)| bi * s * scale).collect();
        // Sign convention: largest-magnitude coefficient positive.
        let lead = a.iter().cloned().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if lead < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
        }
        coeffs.push(a);
    }
    Ok(ParitySolution { values, coeffs })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GalerkinSpectrum {
    pub n: usize,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub a_coeffs: Vec<Vec<f64>>,
    pub b_coeffs: Vec<Vec<f64>>,
}

impl GalerkinSpectrum {
    pub fn values(&self, parity: Parity) -> &[f64] {
        match parity {
            Parity::Even => &self.mu,
            Parity::Odd => &self.nu,
        }
    }

    pub fn coeffs(&self, parity: Parity, index: usize) -> &[f64] {
        match parity {
            Parity::Even => &self.a_coeffs[index],
            Parity::Odd => &self.b_coeffs[index],
        }
    }
}

pub fn solve_parity(w: &Weight, spectrum: &HomSpectrum, parity: Parity, n: usize) -> Result<ParitySolution, GalerkinError> {
    let c = assemble_mass(w, spectrum, parity, n)?;
    let hom: Vec<f64> = spectrum.pairs(parity)[..n].iter().map(|p| p.lambda).collect();
    solve_generalized(&c, &hom)
}

pub fn solve_weighted(w: &Weight, spectrum: &HomSpectrum, n: usize) -> Result<GalerkinSpectrum, GalerkinError> {
    let (even, odd) = rayon::join(
        || solve_parity(w, spectrum, Parity::Even, n),
        || solve_parity(w, spectrum, Parity::Odd, n),
    );
    let (even, odd) = (even?, odd?);
    Ok(GalerkinSpectrum {
        n,
        mu: even.values,
        nu: odd.values,
        a_coeffs: even.coeffs,
        b_coeffs: odd.coeffs,
    })
}

/// Truncated eigenfunction `Σ c_m φ_m(y) sin(m x)` at cell centers.
pub fn reconstruct_coeffs(
    coeffs: &[f64],
    basis: &[HomEigenpair],
    parity: Parity,
    grid: Grid,
    ell: f64,
) -> Result<GridField, GalerkinError> {
    let xs = grid.x_centers();
    let ys = grid.y_centers(ell);
    let phi: Vec<Vec<f64>> = basis.iter().map(|b| ys.iter().map(|&y| b.profile.value(y)).collect()).collect();
    let sx: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| xs.iter().map(|&x| (b.mode.m as f64 * x).sin()).collect())
        .collect();
    let cy = ys.len();
    let mut values = vec![0.0; xs.len() * cy];
    for (m, &c) in coeffs.iter().enumerate() {
        for (i, s) in sx[m].iter().enumerate() {
            let cs = c * s;
            for (j, p) in phi[m].iter().enumerate() {
                values[i * cy + j] += cs * p;
            }
        }
    }
    Ok(GridField::from_cells(grid, ell, Some(parity), values)?)
}

pub fn reconstruct(
    gs: &GalerkinSpectrum,
    spectrum: &HomSpectrum,
    which: (Parity, usize),
    grid: Grid,
) -> Result<GridField, GalerkinError> {
    let (parity, index) = which;
    let b = basis(spectrum, parity, gs.n)?;
    reconstruct_coeffs(gs.coeffs(parity, index), b, parity, grid, spectrum.cfg.ell)
}

/// Merged ascending sequence of both families; ties put the longitudinal
/// value first.
pub fn merge_spectra(mu: &[f64], nu: &[f64]) -> Vec<(f64, Parity)> {
    let mut out: Vec<(f64, Parity)> = mu
        .iter()
        .map(|&v| (v, Parity::Even))
        .chain(nu.iter().map(|&v| (v, Parity::Odd)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylReport {
    /// `(h, r_h)` with `r_h = λ_h (∫√p)² / (16π² h²)`.
    pub ratios: Vec<(usize, f64)>,
    /// `(max - min) / mean` of `r_h` over the upper half of the window.
    pub spread: f64,
    pub median: f64,
    pub sqrt_mass: f64,
}

/// `merged[h - 1] = λ_h(p)`; `window` is inclusive in `h`.
pub fn weyl_diagnostic(w: &Weight, ell: f64, merged: &[f64], window: (usize, usize)) -> WeylReport {
    let sqrt_mass = w.partition(ell).integrate(f64::sqrt);
    let (lo, hi) = window;
    let hi = hi.min(merged.len());
    let ratios: Vec<(usize, f64)> = (lo.max(1)..=hi)
        .map(|h| (h, merged[h - 1] * sqrt_mass * sqrt_mass / (16.0 * PI * PI * (h * h) as f64)))
        .collect();
    let top = &ratios[ratios.len() / 2..];
    let (mut mn, mut mx, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for &(_, r) in top {
        mn = mn.min(r);
        mx = mx.max(r);
        sum += r;
    }
    let spread = (mx - mn) / (sum / top.len() as f64);
    let mut sorted: Vec<f64> = ratios.iter().map(|r| r.1).collect();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let median = if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    };
    WeylReport {
        ratios,
        spread,
        median,
        sqrt_mass,
    }
}
