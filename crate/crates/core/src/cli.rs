//! Command-line front end.
//!
//! Every command writes plain CSV/JSON files into `--out`. Floats are
//! printed as `{:.5e}` so repeated runs are byte-identical.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::galerkin::{merge_spectra, reconstruct, solve_weighted, weyl_diagnostic, GalerkinError, WeylReport};
use crate::optimize::{
    make_p_star, maximize_nu1_fixed_point, minimize_mu_j, ratio_study, ratio_table_weights, GridContext, OptimizationTrace,
    OptimizeError, StopReason, DEFAULT_EPSILON, DEFAULT_MAX_ITERS, RATIO_MU_COUNT,
};
use crate::spectrum::{
    build_spectrum, build_spectrum_capped, torsional_first_threshold, Parity, PlateConfig, SpectrumError,
};
use crate::weights::{
    make_breve_p, make_doublebar_p, make_pbar_j, make_pj_sin4, make_tilde_p, sin4_threshold, validate, Grid, GridField,
    Shape, Weight, WeightError, DEFAULT_GRID,
};

pub const THREADS_ENV: &str = "PLATE_SPECTRA_THREADS";

/// Rows reported by `spectrum`.
const TABLE1_ROWS: usize = 12;
/// Window and per-parity truncation of the `--weyl` report.
const WEYL_WINDOW: (usize, usize) = (200, 400);
const WEYL_MODES: usize = 400;

/// Published values for the ratio table at the reference configuration:
/// `μ₁..μ₁₂, ν₁, ν₂, R` per density.
pub const REFERENCE_TABLE: [(&str, [f64; 15]); 6] = [
    ("uniform", [0.960, 15.4, 77.8, 246.0, 600.0, 1240.0, 2310.0, 3930.0, 6300.0, 9610.0, 14100.0, 19900.0, 10900.0, 43800.0, 1.14]),
    ("pbar10", [0.960, 15.4, 77.7, 246.0, 599.0, 1240.0, 2280.0, 3840.0, 5870.0, 7280.0, 16800.0, 22700.0, 10900.0, 43700.0, 1.50]),
    ("pstar", [1.16, 16.6, 80.6, 251.0, 610.0, 1270.0, 2360.0, 4040.0, 6480.0, 9900.0, 14500.0, 20500.0, 19800.0, 68800.0, 2.00]),
    ("breve", [0.960, 15.4, 77.8, 246.0, 601.0, 1250.0, 2310.0, 3940.0, 6310.0, 9620.0, 14100.0, 20000.0, 17500.0, 70100.0, 1.82]),
    ("doublebar", [1.40, 15.2, 80.5, 296.0, 678.0, 1310.0, 2600.0, 4550.0, 6850.0, 10400.0, 16100.0, 22400.0, 15600.0, 41400.0, 1.49]),
    ("tilde", [0.986, 15.8, 79.8, 252.0, 616.0, 1280.0, 2370.0, 4040.0, 6470.0, 9550.0, 14500.0, 20500.0, 17100.0, 68400.0, 1.79]),
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("weight error: {0}")]
    Weight(String),
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Weight(_) => 3,
            CliError::NotConverged(_) => 4,
            CliError::Io(_) | CliError::Other(_) => 1,
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::Config(_) | SpectrumError::C0Violated { .. } | SpectrumError::TooManyModes { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<GalerkinError> for CliError {
    fn from(e: GalerkinError) -> Self {
        match e {
            GalerkinError::Spectrum(s) => s.into(),
            GalerkinError::Weight(w) => CliError::Weight(w.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<OptimizeError> for CliError {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::Spectrum(s) => s.into(),
            OptimizeError::Galerkin(g) => g.into(),
            OptimizeError::InvalidIndex { .. } => CliError::Config(e.to_string()),
            other => CliError::Weight(other.to_string()),
        }
    }
}

impl From<WeightError> for CliError {
    fn from(e: WeightError) -> Self {
        CliError::Weight(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "plate-spectra", version, about = "Weighted eigenvalues of a partially hinged plate")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Half width of the plate.
    #[arg(long, global = true, default_value_t = PI / 150.0)]
    pub ell: f64,
    /// Poisson ratio.
    #[arg(long, global = true, default_value_t = 0.2)]
    pub sigma: f64,
    #[arg(long, global = true, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, global = true, default_value_t = 1.5)]
    pub beta: f64,
    /// Galerkin truncation per parity.
    #[arg(long, global = true, default_value_t = 30)]
    pub n_modes: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Grid nodes in x and y (y count odd).
    #[arg(long, global = true, num_args = 2, value_names = ["NX", "NY"])]
    pub grid: Option<Vec<usize>>,
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Weight spec (JSON).
    #[arg(long, global = true)]
    pub weight: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Homogeneous eigenvalues and structural constants.
    Spectrum,
    /// Weighted eigenvalues of the density given by `--weight`.
    Eigs {
        /// Reconstruct the first K eigenfunctions of each parity.
        #[arg(long, default_value_t = 0)]
        eigenfunctions: usize,
    },
    /// Rearrangement iterations.
    Optimize {
        #[command(subcommand)]
        target: OptimizeTarget,
    },
    /// Eigenvalues and ratio for the six comparison densities.
    RatioTable {
        /// Append the Weyl diagnostic of the uniform plate.
        #[arg(long)]
        weyl: bool,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum OptimizeTarget {
    /// Lower the j-th longitudinal eigenvalue.
    MinMu {
        j: usize,
        /// Compare the result with the sin⁴ band weight.
        #[arg(long)]
        sin4: bool,
    },
    /// Raise the first torsional eigenvalue.
    MaxNu1,
}

impl CommonArgs {
    pub fn plate(&self) -> Result<PlateConfig, CliError> {
        PlateConfig::new(self.ell, self.sigma, self.alpha, self.beta, self.n_modes).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        match self.grid.as_deref() {
            None => Ok(DEFAULT_GRID),
            Some(&[nx, ny]) => Grid::new(nx, ny).map_err(|e| CliError::Config(e.to_string())),
            Some(_) => Err(CliError::Config("--grid takes two values".into())),
        }
    }
}

/// Applies `PLATE_SPECTRA_THREADS` to the global rayon pool.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{THREADS_ENV}={raw:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))
}

pub fn fmt_f(x: f64) -> String {
    format!("{x:.5e}")
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir)?;
    tmp.write_all(contents)?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.to_string()))?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

/// Resolves `{"variant": "preset", "parameters": {"name": ..., "j": ...}}`
/// or parses an explicit weight.
pub fn parse_weight(text: &str, cfg: &PlateConfig, grid: Grid) -> Result<Weight, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Weight(format!("malformed JSON: {e}")))?;
    if value.get("variant").and_then(Value::as_str) == Some("preset") {
        let params = value.get("parameters").cloned().unwrap_or(Value::Null);
        let name = params
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| CliError::Weight("preset needs parameters.name".into()))?;
        let j = params.get("j").and_then(Value::as_u64).map(|j| j as u32);
        let need_j = || j.filter(|&j| j >= 1).ok_or_else(|| CliError::Weight(format!("preset {name} needs j >= 1")));
        return Ok(match name {
            "uniform" => Weight::uniform(cfg),
            "pbar" => make_pbar_j(need_j()?, cfg),
            "pj_sin4" => make_pj_sin4(need_j()?, cfg),
            "breve" => make_breve_p(cfg),
            "doublebar" => make_doublebar_p(cfg),
            "tilde" => make_tilde_p(cfg),
            "pstar" => make_p_star(&GridContext::new(cfg, grid)?)?.weight,
            other => return Err(CliError::Weight(format!("unknown preset {other:?}"))),
        });
    }
    serde_json::from_value(value).map_err(|e| CliError::Weight(format!("invalid weight spec: {e}")))
}

fn load_weight(path: &Path, cfg: &PlateConfig, grid: Grid) -> Result<Weight, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Weight(format!("{}: {e}", path.display())))?;
    let w = parse_weight(&text, cfg, grid)?;
    if let Shape::Sublevel { field, .. } = &w.shape {
        if (field.ell() - cfg.ell).abs() > 1e-12 * cfg.ell {
            return Err(CliError::Weight(format!("field ell {} differs from --ell {}", field.ell(), cfg.ell)));
        }
    }
    let report = validate(&w, cfg);
    if !report.passes {
        return Err(CliError::Weight(format!(
            "weight outside the admissible class: {} bound violations (max excess {:e}), symmetry residual {:e}, mass error {:e}",
            report.bound_violations, report.max_bound_excess, report.symmetry_residual, report.mass_error
        )));
    }
    Ok(w)
}

/// Runs one command; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = cli.common.plate()?;
    let out = &cli.common.out;
    match &cli.command {
        Command::Spectrum => cmd_spectrum(&cfg, out),
        Command::Eigs { eigenfunctions } => {
            let grid = cli.common.grid()?;
            let path = cli
                .common
                .weight
                .as_deref()
                .ok_or_else(|| CliError::Weight("eigs needs --weight FILE".into()))?;
            let w = load_weight(path, &cfg, grid)?;
            cmd_eigs(&cfg, &w, grid, *eigenfunctions, out)
        }
        Command::Optimize { target } => {
            let grid = cli.common.grid()?;
            let initial = match &cli.common.weight {
                Some(p) => Some(load_weight(p, &cfg, grid)?),
                None => None,
            };
            cmd_optimize(&cfg, grid, target, initial, cli.common.epsilon, cli.common.max_iters, out)
        }
        Command::RatioTable { weyl } => {
            if cfg.n_modes < RATIO_MU_COUNT {
                return Err(CliError::Config(format!("ratio-table needs --n-modes >= {RATIO_MU_COUNT}")));
            }
            cmd_ratio_table(&cfg, cli.common.grid()?, *weyl, out)
        }
    }
}

#[derive(Serialize)]
struct SpectrumMeta {
    ell: f64,
    sigma: f64,
    j0: usize,
    c0_holds: bool,
    c0_s_star: f64,
    torsional_first_threshold: u32,
    modes: Vec<(String, u32, u32)>,
}

pub fn cmd_spectrum(cfg: &PlateConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let cfg = cfg.with_n_modes(cfg.n_modes.max(TABLE1_ROWS));
    let spec = build_spectrum(&cfg)?;
    let mut csv = String::from("m,mu,nu\n");
    for i in 0..TABLE1_ROWS {
        writeln!(csv, "{},{},{}", i + 1, fmt_f(spec.mu[i].lambda), fmt_f(spec.nu[i].lambda)).unwrap();
    }
    let modes = spec
        .mu
        .iter()
        .take(TABLE1_ROWS)
        .chain(spec.nu.iter().take(TABLE1_ROWS))
        .map(|p| (p.mode.parity.label().to_string(), p.mode.m, p.mode.k))
        .collect();
    let meta = SpectrumMeta {
        ell: cfg.ell,
        sigma: cfg.sigma,
        j0: spec.j0,
        c0_holds: spec.c0.holds,
        c0_s_star: spec.c0.s_star,
        torsional_first_threshold: torsional_first_threshold(&cfg),
        modes,
    };
    let (p1, p2) = (out.join("table1.csv"), out.join("spectrum_meta.json"));
    write_atomic(&p1, csv.as_bytes())?;
    write_json(&p2, &meta)?;
    Ok(vec![p1, p2])
}

fn matrix_csv(field: &GridField) -> String {
    let g = field.grid();
    let mut s = String::new();
    for j in 0..g.cells_y() {
        let row: Vec<String> = (0..g.cells_x()).map(|i| fmt_f(field.get(i, j))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn cmd_eigs(cfg: &PlateConfig, w: &Weight, grid: Grid, eigenfunctions: usize, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let spec = build_spectrum(cfg)?;
    let gs = solve_weighted(w, &spec, cfg.n_modes)?;
    let mut csv = String::from("index,parity,value\n");
    for parity in [Parity::Even, Parity::Odd] {
        for (i, v) in gs.values(parity).iter().enumerate() {
            writeln!(csv, "{},{},{}", i + 1, parity.label(), fmt_f(*v)).unwrap();
        }
    }
    let path = out.join("eigs.csv");
    write_atomic(&path, csv.as_bytes())?;
    let mut written = vec![path];
    for parity in [Parity::Even, Parity::Odd] {
        for i in 0..eigenfunctions.min(cfg.n_modes) {
            let field = reconstruct(&gs, &spec, (parity, i), grid)?;
            let p = out.join(format!("eigenfunction_{}_{}.csv", parity.label(), i + 1));
            write_atomic(&p, matrix_csv(&field).as_bytes())?;
            written.push(p);
        }
    }
    Ok(written)
}

/// `x,y,field,in_set` per cell, with `in_set` the β share of the cell.
fn set_csv(w: &Weight, grid: Grid, ell: f64, cfg: &PlateConfig) -> String {
    let field = match &w.shape {
        Shape::Sublevel { field, .. } => Some(field),
        _ => None,
    };
    let values = w.grid_values(grid, ell);
    let (xc, yc) = (grid.x_centers(), grid.y_centers(ell));
    let mut s = String::from("x,y,field,in_set\n");
    for (i, x) in xc.iter().enumerate() {
        for (j, y) in yc.iter().enumerate() {
            let f = field.map_or(String::new(), |f| fmt_f(f.get(i, j)));
            let share = (values[i * grid.cells_y() + j] - cfg.alpha) / (cfg.beta - cfg.alpha);
            writeln!(s, "{},{},{},{}", fmt_f(*x), fmt_f(*y), f, fmt_f(share)).unwrap();
        }
    }
    s
}

/// Grid-line segments separating cells of different value: `x0,y0,x1,y1`.
fn boundary_csv(w: &Weight, grid: Grid, ell: f64) -> String {
    let v = w.grid_values(grid, ell);
    let (xe, ye) = (grid.x_edges(), grid.y_edges(ell));
    let cy = grid.cells_y();
    let mut s = String::from("x0,y0,x1,y1\n");
    let mut seg = |a: f64, b: f64, c: f64, d: f64| writeln!(s, "{},{},{},{}", fmt_f(a), fmt_f(b), fmt_f(c), fmt_f(d)).unwrap();
    for i in 0..grid.cells_x() {
        for j in 0..cy {
            let here = v[i * cy + j];
            if i + 1 < grid.cells_x() && v[(i + 1) * cy + j] != here {
                seg(xe[i + 1], ye[j], xe[i + 1], ye[j + 1]);
            }
            if j + 1 < cy && v[i * cy + j + 1] != here {
                seg(xe[i], ye[j + 1], xe[i + 1], ye[j + 1]);
            }
        }
    }
    s
}

fn trace_jsonl(trace: &OptimizationTrace) -> Result<String, CliError> {
    let mut s = String::new();
    for it in &trace.iterates {
        s.push_str(&serde_json::to_string(it).map_err(|e| CliError::Other(e.to_string()))?);
        s.push('\n');
    }
    Ok(s)
}

#[derive(Serialize)]
struct Sin4Comparison {
    t_j: f64,
    /// `|S △ S_sin4| / |Ω|`
    sym_diff: f64,
    mu_j_sin4: f64,
}

#[derive(Serialize)]
struct OptimizeSummary<'a> {
    target: &'a crate::optimize::Target,
    stop_reason: StopReason,
    iterations: usize,
    eigenvalues: Vec<f64>,
    rejected_eigenvalue: Option<f64>,
    threshold: Option<f64>,
    sin4: Option<Sin4Comparison>,
}

pub fn cmd_optimize(
    cfg: &PlateConfig,
    grid: Grid,
    target: &OptimizeTarget,
    initial: Option<Weight>,
    epsilon: f64,
    max_iters: usize,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let ctx = GridContext::new(cfg, grid)?;
    let trace = match target {
        OptimizeTarget::MinMu { j, .. } => {
            let init = initial.unwrap_or_else(|| Weight::uniform(cfg));
            minimize_mu_j(&ctx, *j, epsilon, max_iters, &init)?
        }
        OptimizeTarget::MaxNu1 => maximize_nu1_fixed_point(&ctx, max_iters)?,
    };
    let last = trace.last();
    let sin4 = match target {
        OptimizeTarget::MinMu { j, sin4: true } => {
            let band = make_pj_sin4(*j as u32, cfg);
            let a = last.weight.grid_values(grid, cfg.ell);
            let b = band.grid_values(grid, cfg.ell);
            let area = grid_cell_area(grid, cfg.ell);
            let d: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs() / (cfg.beta - cfg.alpha) * area).sum();
            let gs = solve_weighted(&band, &ctx.spectrum, cfg.n_modes)?;
            Some(Sin4Comparison {
                t_j: sin4_threshold(cfg),
                sym_diff: d / cfg.area(),
                mu_j_sin4: gs.mu[j - 1],
            })
        }
        _ => None,
    };
    let summary = OptimizeSummary {
        target: &trace.target,
        stop_reason: trace.stop_reason,
        iterations: trace.iterates.len(),
        eigenvalues: trace.eigenvalues(),
        rejected_eigenvalue: trace.rejected.as_ref().map(|r| r.eigenvalue),
        threshold: last.threshold.map(|t| t.t),
        sin4,
    };
    let paths = [
        out.join("trace.jsonl"),
        out.join("final_weight.json"),
        out.join("set.csv"),
        out.join("boundary.csv"),
        out.join("optimize_summary.json"),
    ];
    write_atomic(&paths[0], trace_jsonl(&trace)?.as_bytes())?;
    write_json(&paths[1], &last.weight)?;
    write_atomic(&paths[2], set_csv(&last.weight, grid, cfg.ell, cfg).as_bytes())?;
    write_atomic(&paths[3], boundary_csv(&last.weight, grid, cfg.ell).as_bytes())?;
    write_json(&paths[4], &summary)?;
    match trace.stop_reason {
        StopReason::Converged | StopReason::NoDescent => Ok(paths.to_vec()),
        other => Err(CliError::NotConverged(format!(
            "stopped with {other:?} after {} iterates",
            trace.iterates.len()
        ))),
    }
}

fn grid_cell_area(grid: Grid, ell: f64) -> f64 {
    PI / grid.cells_x() as f64 * 2.0 * ell / grid.cells_y() as f64
}

fn is_reference(cfg: &PlateConfig) -> bool {
    let r = PlateConfig::reference();
    (cfg.ell - r.ell).abs() <= 1e-15 && cfg.sigma == r.sigma && cfg.alpha == r.alpha && cfg.beta == r.beta && cfg.n_modes == r.n_modes
}

/// Rows are the quantities, columns the densities, each followed by its
/// relative deviation from [`REFERENCE_TABLE`] (blank off the reference
/// configuration).
pub fn ratio_table_csv(report: &crate::optimize::RatioReport, cfg: &PlateConfig) -> String {
    let reference = is_reference(cfg);
    let mut s = String::from("quantity");
    for row in &report.rows {
        write!(s, ",{0},{0}_dev", row.label).unwrap();
    }
    s.push('\n');
    let mut names: Vec<String> = (1..=RATIO_MU_COUNT).map(|j| format!("mu_{j}")).collect();
    names.extend(["nu_1".into(), "nu_2".into(), format!("R_{}", report.j0)]);
    for (q, name) in names.iter().enumerate() {
        s.push_str(name);
        for row in &report.rows {
            let v = match q {
                q if q < RATIO_MU_COUNT => row.mu[q],
                12 => row.nu1,
                13 => row.nu2,
                _ => row.r,
            };
            let dev = REFERENCE_TABLE
                .iter()
                .find(|(l, _)| *l == row.label)
                .filter(|_| reference)
                .map_or(String::new(), |(_, vals)| fmt_f((v - vals[q]) / vals[q]));
            write!(s, ",{},{}", fmt_f(v), dev).unwrap();
        }
        s.push('\n');
    }
    s
}

/// Weyl ratios of the homogeneous plate.
pub fn uniform_weyl(cfg: &PlateConfig) -> Result<WeylReport, CliError> {
    let big = cfg.with_n_modes(WEYL_MODES);
    let spec = build_spectrum_capped(&big, WEYL_MODES)?;
    let merged: Vec<f64> = merge_spectra(&spec.values(Parity::Even), &spec.values(Parity::Odd))
        .into_iter()
        .map(|(v, _)| v)
        .collect();
    Ok(weyl_diagnostic(&Weight::uniform(cfg), cfg.ell, &merged, WEYL_WINDOW))
}

pub fn cmd_ratio_table(cfg: &PlateConfig, grid: Grid, weyl: bool, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let ctx = GridContext::new(cfg, grid)?;
    let weights = ratio_table_weights(&ctx)?;
    let report = ratio_study(&weights, &ctx.spectrum)?;
    let path = out.join("ratio_table.csv");
    write_atomic(&path, ratio_table_csv(&report, cfg).as_bytes())?;
    let mut written = vec![path];
    if weyl {
        let w = uniform_weyl(cfg)?;
        let mut s = format!("# spread,{}\n# median,{}\nh,r\n", fmt_f(w.spread), fmt_f(w.median));
        for (h, r) in &w.ratios {
            writeln!(s, "{h},{}", fmt_f(*r)).unwrap();
        }
        let p = out.join("weyl.csv");
        write_atomic(&p, s.as_bytes())?;
        written.push(p);
    }
    Ok(written)
}
