mod common;

use std::f64::consts::PI;

use plate_spectra::optimize::{
    make_p_star, maximize_nu1_fixed_point, minimize_mu_j, GridContext, OptimizationTrace, StopReason,
};
use plate_spectra::spectrum::PlateConfig;
use plate_spectra::weights::{validate, Weight, DEFAULT_GRID};

fn ctx() -> GridContext {
    GridContext::new(&PlateConfig::reference(), DEFAULT_GRID).unwrap()
}

#[test]
fn first_mode_concentrates_beta_in_the_middle() {
    let ctx = ctx();
    let cfg = ctx.cfg;
    let tr = minimize_mu_j(&ctx, 1, 1e-4, 100, &Weight::uniform(&cfg)).unwrap();
    assert_eq!(tr.stop_reason, StopReason::Converged);
    assert!(tr.is_monotone_non_increasing());
    let w = &tr.last().weight;
    // On every line y = const, β fills one central interval close to (π/4, 3π/4).
    for s in [0.0, 0.5, 0.95] {
        let y = s * cfg.ell;
        let xs: Vec<f64> = (0..1000).map(|i| PI * (i as f64 + 0.5) / 1000.0).collect();
        let inside: Vec<bool> = xs.iter().map(|&x| w.eval(x, y) == cfg.beta).collect();
        let switches = inside.windows(2).filter(|p| p[0] != p[1]).count();
        assert_eq!(switches, 2, "y = {y}");
        let lo = xs[inside.iter().position(|&b| b).unwrap()];
        let hi = xs[inside.iter().rposition(|&b| b).unwrap()];
        assert!((lo - PI / 4.0).abs() < 0.05 && (hi - 3.0 * PI / 4.0).abs() < 0.05, "({lo}, {hi})");
    }
}

#[test]
fn fixed_point_stays_near_p_star() {
    let ctx = ctx();
    let tr = maximize_nu1_fixed_point(&ctx, 20).unwrap();
    let nu1_hom = ctx.spectrum.nu[0].lambda;
    assert!(tr.iterates[0].sym_diff.unwrap() < 0.05);
    assert_eq!(tr.iterates[0].weight, make_p_star(&ctx).unwrap().weight);
    for it in &tr.iterates {
        assert!(it.eigenvalue >= nu1_hom);
        assert!(validate(&it.weight, &ctx.cfg).passes);
    }
}

#[test]
fn higher_modes_keep_admissible_iterates() {
    let ctx = ctx();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(31);
    let start = common::random_grid_weight(&mut rng, &ctx.cfg, DEFAULT_GRID);
    for j in [3, 7] {
        let tr = minimize_mu_j(&ctx, j, 1e-4, 30, &start).unwrap();
        assert!(tr.is_monotone_non_increasing());
        for it in tr.iterates.iter().chain(&tr.rejected) {
            assert!(validate(&it.weight, &ctx.cfg).passes);
            assert!(it.mode_index + 1 >= j);
        }
    }
}

#[test]
fn traces_round_trip_through_json() {
    let ctx = ctx();
    let tr = minimize_mu_j(&ctx, 2, 1e-4, 5, &Weight::uniform(&ctx.cfg)).unwrap();
    let back: OptimizationTrace = serde_json::from_str(&serde_json::to_string(&tr).unwrap()).unwrap();
    assert_eq!(back, tr);
}
