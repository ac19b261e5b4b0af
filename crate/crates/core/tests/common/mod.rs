#![allow(dead_code)]

use std::f64::consts::PI;

use plate_spectra::spectrum::{Parity, PlateConfig};
use plate_spectra::weights::{beta_fraction, Grid, GridField, Interval, Shape, Weight};
use rand::Rng;

/// `k` disjoint intervals of `(lo, hi)` with total length `frac·(hi - lo)`.
fn random_intervals<R: Rng>(rng: &mut R, lo: f64, hi: f64, frac: f64, k: usize) -> Vec<Interval> {
    let lens: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
    let gaps: Vec<f64> = (0..=k).map(|_| rng.gen_range(0.2..1.0)).collect();
    let (ls, gs): (f64, f64) = (lens.iter().sum(), gaps.iter().sum());
    let width = hi - lo;
    let mut x = lo;
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        x += gaps[i] / gs * (1.0 - frac) * width;
        let len = lens[i] / ls * frac * width;
        out.push(Interval::new(x, x + len));
        x += len;
    }
    out
}

fn bands(cfg: &PlateConfig, shape: Shape) -> Weight {
    Weight {
        shape,
        alpha: cfg.alpha,
        beta: cfg.beta,
    }
}

/// β on random x-intervals, α elsewhere, mass `|Ω|`.
pub fn random_x_bands<R: Rng>(rng: &mut R, cfg: &PlateConfig) -> Weight {
    let k = rng.gen_range(1..=6);
    let intervals = random_intervals(rng, 0.0, PI, beta_fraction(cfg), k);
    bands(
        cfg,
        Shape::XBands {
            intervals,
            inside: cfg.beta,
            outside: cfg.alpha,
        },
    )
}

/// β on random y-strips mirrored about `y = 0`.
pub fn random_y_bands<R: Rng>(rng: &mut R, cfg: &PlateConfig) -> Weight {
    let k = rng.gen_range(1..=3);
    let half = random_intervals(rng, 0.0, cfg.ell, beta_fraction(cfg), k);
    let mut intervals: Vec<Interval> = half.iter().rev().map(|iv| Interval::new(-iv.hi, -iv.lo)).collect();
    intervals.extend(half);
    bands(
        cfg,
        Shape::YBands {
            intervals,
            inside: cfg.beta,
            outside: cfg.alpha,
        },
    )
}

/// A smooth, positive, y-even random field.
pub fn random_field<R: Rng>(rng: &mut R, grid: Grid, ell: f64) -> GridField {
    let a: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f: Vec<f64> = (0..4).map(|_| rng.gen_range(1.0..9.0)).collect();
    GridField::from_fn(grid, ell, Some(Parity::Even), move |x, y| {
        let s = y / ell;
        let v = a[0] * (f[0] * x).sin()
            + a[1] * (f[1] * x + a[4]).cos()
            + a[2] * s * s * (f[2] * x).sin()
            + a[3] * (PI * s).cos() * (f[3] * x).cos()
            + a[5] * s * s;
        v * v + 0.01
    })
}

/// β on the sublevel set of a random field: admissible and constant on the
/// cells of `grid`.
pub fn random_grid_weight<R: Rng>(rng: &mut R, cfg: &PlateConfig, grid: Grid) -> Weight {
    let field = random_field(rng, grid, cfg.ell);
    plate_spectra::optimize::rearrange_min(&field, cfg).unwrap().weight
}

/// β on a random union of x-bands, snapped to whole cells of `grid`.
pub fn random_grid_x_bands<R: Rng>(rng: &mut R, cfg: &PlateConfig, grid: Grid) -> Weight {
    let a: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let field = GridField::from_fn(grid, cfg.ell, Some(Parity::Even), move |x, _| {
        3.0 + a[0] * x.sin() + a[1] * (2.0 * x + a[5]).cos() + a[2] * (3.0 * x).sin() + a[3] * (4.0 * x).cos() + a[4] * (7.0 * x).cos()
    });
    plate_spectra::optimize::rearrange_min(&field, cfg).unwrap().weight
}

/// Any of the generators above, for the analytic (not grid-bound) uses.
pub fn random_weight<R: Rng>(rng: &mut R, cfg: &PlateConfig, grid: Grid) -> Weight {
    match rng.gen_range(0..3) {
        0 => random_x_bands(rng, cfg),
        1 => random_y_bands(rng, cfg),
        _ => random_grid_weight(rng, cfg, grid),
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
