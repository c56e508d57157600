//! Command-line front end: `spectrum`, `estimate`, `verify`, `hull`.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage error, 3 numeric or
//! domain error. Every output file gets one JSON line in `runs.log`.

pub mod config;
pub mod output;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{spectrum_table, SleParams, SpectrumVariant};
use crate::loewner::{hull_point_cloud, McConfig, DEFAULT_NEAR_FACTOR};
use crate::moments::{dyadic_scales, fit_spectrum_slope_with, EstimatorOptions, MomentVariant};
use crate::verify::{run_suite, Suite};
use output::{append_manifest, default_log_path, emit, fmt_f64, hull_svg, sha256_hex, Csv, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Largest capped fraction tolerated at any scale by `estimate`.
pub const MAX_CAPPED_FRACTION: f64 = 0.01;
/// Largest absorbed fraction tolerated by `hull`.
pub const MAX_ABSORBED_FRACTION: f64 = 0.10;

pub const SPECTRUM_HEADER: [&str; 4] = ["kappa", "t", "value", "branch"];
pub const ESTIMATE_HEADER: [&str; 10] =
    ["row", "kappa", "t", "variant", "r_minus_1", "value", "stderr", "n_paths", "capped_paths", "horizon_paths"];
pub const VERIFY_HEADER: [&str; 7] = ["suite", "check", "kappa", "t", "location", "value", "pass"];
pub const HULL_HEADER: [&str; 6] = ["index", "launch_angle", "x", "y", "modulus", "absorbed"];

#[derive(Debug, Parser)]
#[command(name = "sle-spectrum", version, about = "Integral means spectra of SLE: closed forms, Monte Carlo, checks")]
pub struct Cli {
    /// Flat key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Manifest file (default: runs.log beside the output).
    #[arg(long, global = true)]
    pub log: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Tabulate a spectrum curve.
    Spectrum(SpectrumArgs),
    /// Monte Carlo moments at dyadic scales and the fitted slope.
    Estimate(EstimateArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Reverse-flow image of a circle near the unit circle.
    Hull(HullArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum SpectrumKind {
    Whole,
    Bulk,
    Conjectured,
    F,
    Fplus,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: f64,
    #[arg(long)]
    pub t_step: f64,
    #[arg(long, value_enum, default_value = "whole")]
    pub variant: SpectrumKind,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum EstimateKind {
    Whole,
    Bulk,
    Point,
}

/// Inclusive range `k1..k2` of dyadic exponents, `r - 1 = 2^-k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScaleRange {
    pub lo: u32,
    pub hi: u32,
}

fn parse_scales(s: &str) -> std::result::Result<ScaleRange, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected k1..k2, got {s:?}"))?;
    let lo: u32 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let hi: u32 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if hi < lo + 2 {
        return Err(format!("need at least three scales, got {lo}..{hi}"));
    }
    if hi > 50 {
        return Err(format!("exponent {hi} exceeds 50"));
    }
    Ok(ScaleRange { lo, hi })
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, value_enum, default_value = "bulk")]
    pub variant: EstimateKind,
    #[arg(long, value_parser = parse_scales, default_value = "4..9")]
    pub scales: ScaleRange,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    /// Coarse step; rounded down to a power of two.
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Evaluation angle for `point`.
    #[arg(long, default_value_t = PI)]
    pub theta: f64,
    /// Lower angle of the bulk arc `|θ| ≥ θ_min`.
    #[arg(long, default_value_t = PI / 4.0)]
    pub theta_min: f64,
    #[arg(long, default_value_t = DEFAULT_NEAR_FACTOR)]
    pub near_factor: f64,
    #[arg(long, default_value_t = 50.0)]
    pub r_stop: f64,
    #[arg(long, default_value_t = 10.0)]
    pub s_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub grid_density: f64,
    #[arg(long, default_value_t = 9)]
    pub bulk_nodes: usize,
    /// Disable the floor on `log|F₀′|` for negative `t`.
    #[arg(long)]
    pub no_cap: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: String,
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct HullArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long)]
    pub time: f64,
    #[arg(long, default_value_t = 1024)]
    pub n_points: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub dt: f64,
    #[arg(long, default_value_t = DEFAULT_NEAR_FACTOR)]
    pub near_factor: f64,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Bytes of one output file and its destination.
struct Artifact {
    path: Option<PathBuf>,
    bytes: Vec<u8>,
}

struct Outcome {
    artifacts: Vec<Artifact>,
    seed: Option<u64>,
    code: i32,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

/// Runs the program on `argv` (including the program name) and returns the
/// exit code. Diagnostics go to stderr.
pub fn run(argv: Vec<String>) -> i32 {
    let argv = match config::config_path(&argv) {
        Some(p) => match config::read_config(Path::new(&p)) {
            Ok(entries) => config::merge_config(&argv, &entries),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        },
        None => argv,
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads > 0 {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let started = Instant::now();
    let outcome = match dispatch(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let wall = started.elapsed().as_secs_f64();
    let config_sha256 = match serde_json::to_vec(&cli.command) {
        Ok(v) => sha256_hex(&v),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NUMERIC;
        }
    };
    for a in &outcome.artifacts {
        if let Err(e) = emit(a.path.as_deref(), &a.bytes) {
            eprintln!("error: {e}");
            return EXIT_NUMERIC;
        }
        let m = RunManifest {
            command_line: argv.clone(),
            command: command_name(&cli.command).to_string(),
            master_seed: outcome.seed,
            config_sha256: config_sha256.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: wall,
            output: a.path.as_ref().map_or("-".to_string(), |p| p.display().to_string()),
            output_sha256: sha256_hex(&a.bytes),
            exit_code: outcome.code,
        };
        let log = cli.log.clone().unwrap_or_else(|| default_log_path(a.path.as_deref()));
        if let Err(e) = append_manifest(&log, &m) {
            eprintln!("error: {e}");
            return EXIT_NUMERIC;
        }
    }
    outcome.code
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Spectrum(_) => "spectrum",
        Command::Estimate(_) => "estimate",
        Command::Verify(_) => "verify",
        Command::Hull(_) => "hull",
    }
}

fn dispatch(c: &Command) -> Result<Outcome> {
    match c {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Hull(a) => cmd_hull(a),
    }
}

/// `lo, lo + step, ...` up to `hi`, with `hi` included when it lies on the grid
/// up to rounding.
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
        return Err(Error::Usage("grid bounds and step must be finite".into()));
    }
    if !(step > 0.0) {
        return Err(Error::Usage(format!("--t-step must be positive, got {step}")));
    }
    if hi < lo {
        return Err(Error::Usage(format!("--t-max {hi} is below --t-min {lo}")));
    }
    let n = ((hi - lo) / step * (1.0 + 1e-12) + 1e-9).floor();
    if n > 1e7 {
        return Err(Error::Usage(format!("grid of {n} points is too large")));
    }
    Ok((0..=n as usize).map(|i| lo + i as f64 * step).collect())
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<Outcome> {
    let grid = linear_grid(a.t_min, a.t_max, a.t_step)?;
    let variant = match a.variant {
        SpectrumKind::Whole => SpectrumVariant::WholeSle,
        SpectrumKind::Bulk => SpectrumVariant::Bulk,
        SpectrumKind::Conjectured => SpectrumVariant::ConjecturedAlmostSure,
        SpectrumKind::F => SpectrumVariant::DuplantierF,
        SpectrumKind::Fplus => SpectrumVariant::DuplantierFPlus,
    };
    let curve = spectrum_table(a.kappa, &grid, variant)?;
    let mut csv = Csv::new(&SPECTRUM_HEADER);
    for (t, v, b) in &curve.samples {
        csv.row([fmt_f64(a.kappa), fmt_f64(*t), fmt_f64(*v), b.as_str().to_string()]);
    }
    Ok(Outcome { artifacts: vec![Artifact { path: a.out.clone(), bytes: csv.as_bytes().to_vec() }], seed: None, code: EXIT_OK })
}

fn cmd_estimate(a: &EstimateArgs) -> Result<Outcome> {
    let p = SleParams::new(a.kappa, a.t)?;
    let variant = match a.variant {
        EstimateKind::Whole => MomentVariant::Whole,
        EstimateKind::Bulk => MomentVariant::Bulk { theta_min: a.theta_min },
        EstimateKind::Point => MomentVariant::Point { theta: a.theta },
    };
    let cfg = McConfig {
        dt: a.dt,
        n_paths: a.paths,
        master_seed: a.seed,
        r_stop: a.r_stop,
        s_max: a.s_max,
        near_factor: a.near_factor,
        ..McConfig::new(a.kappa)
    };
    let opts = EstimatorOptions {
        cap_negative: !a.no_cap,
        grid_density: a.grid_density,
        bulk_nodes: a.bulk_nodes,
        ..EstimatorOptions::default()
    };
    if !(opts.grid_density > 0.0 && opts.grid_density.is_finite()) || opts.bulk_nodes < 2 {
        return Err(Error::Usage("--grid-density must be positive and --bulk-nodes at least 2".into()));
    }
    let scales = dyadic_scales(a.scales.lo, a.scales.hi);
    let fit = fit_spectrum_slope_with(p, variant, &scales, &cfg, &opts)?;
    let name = variant.as_str().to_string();
    let mut csv = Csv::new(&ESTIMATE_HEADER);
    let (mut capped, mut hit) = (0, 0);
    let mut worst: Option<(f64, f64)> = None;
    for e in &fit.estimates {
        csv.row([
            "scale".to_string(),
            fmt_f64(a.kappa),
            fmt_f64(a.t),
            name.clone(),
            fmt_f64(e.r_minus_1),
            fmt_f64(e.log_mean),
            fmt_f64(e.log_stderr()),
            e.n_paths.to_string(),
            e.capped_paths.to_string(),
            e.horizon_paths.to_string(),
        ]);
        capped = capped.max(e.capped_paths);
        hit = hit.max(e.horizon_paths);
        if e.capped_fraction() > MAX_CAPPED_FRACTION && worst.is_none_or(|w| e.capped_fraction() > w.1) {
            worst = Some((e.r_minus_1, e.capped_fraction()));
        }
    }
    csv.row([
        "slope".to_string(),
        fmt_f64(a.kappa),
        fmt_f64(a.t),
        name,
        String::new(),
        fmt_f64(fit.slope),
        fmt_f64(fit.slope_stderr),
        a.paths.to_string(),
        capped.to_string(),
        hit.to_string(),
    ]);
    let code = match worst {
        Some((h, frac)) => {
            eprintln!(
                "error: {:.2}% of paths capped at r - 1 = {h:e} (limit {:.0}%); the estimate is dominated by the floor",
                100.0 * frac,
                100.0 * MAX_CAPPED_FRACTION
            );
            EXIT_NUMERIC
        }
        None => EXIT_OK,
    };
    Ok(Outcome { artifacts: vec![Artifact { path: a.out.clone(), bytes: csv.as_bytes().to_vec() }], seed: Some(a.seed), code })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let suite: Suite = a.suite.parse()?;
    let p = SleParams::new(a.kappa, a.t)?;
    let rows = run_suite(suite, p)?;
    let mut csv = Csv::new(&VERIFY_HEADER);
    for r in &rows {
        csv.row([
            suite.to_string(),
            r.check.clone(),
            fmt_f64(r.kappa),
            fmt_f64(r.t),
            r.location.clone(),
            fmt_f64(r.value),
            r.pass.to_string(),
        ]);
    }
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    let code = if failed.is_empty() {
        EXIT_OK
    } else {
        eprintln!("{} of {} checks failed:", failed.len(), rows.len());
        for r in failed.iter().take(10) {
            eprintln!("  {} at {}: value {}", r.check, r.location, fmt_f64(r.value));
        }
        EXIT_CHECK_FAILED
    };
    Ok(Outcome { artifacts: vec![Artifact { path: a.out.clone(), bytes: csv.as_bytes().to_vec() }], seed: None, code })
}

fn cmd_hull(a: &HullArgs) -> Result<Outcome> {
    let cfg = McConfig { dt: a.dt, master_seed: a.seed, near_factor: a.near_factor, ..McConfig::new(a.kappa) };
    cfg.validate()?;
    let cloud = hull_point_cloud(&cfg, a.time, a.n_points, a.epsilon)?;
    let mut csv = Csv::new(&HULL_HEADER);
    for (k, (th, z)) in cloud.angles.iter().zip(&cloud.points).enumerate() {
        let (x, y, m) = z.map_or((f64::NAN, f64::NAN, f64::NAN), |z| (z.re, z.im, z.norm()));
        csv.row([k.to_string(), fmt_f64(*th), fmt_f64(x), fmt_f64(y), fmt_f64(m), z.is_none().to_string()]);
    }
    let mut artifacts = vec![Artifact { path: a.out.clone(), bytes: csv.as_bytes().to_vec() }];
    if let Some(svg) = &a.svg {
        let pts: Vec<_> = cloud.points.iter().flatten().copied().collect();
        artifacts.push(Artifact { path: Some(svg.clone()), bytes: hull_svg(&pts).into_bytes() });
    }
    let frac = cloud.absorbed() as f64 / a.n_points as f64;
    let code = if frac > MAX_ABSORBED_FRACTION {
        eprintln!(
            "error: {} of {} points absorbed (limit {:.0}%); increase --epsilon or decrease --time",
            cloud.absorbed(),
            a.n_points,
            100.0 * MAX_ABSORBED_FRACTION
        );
        EXIT_NUMERIC
    } else {
        EXIT_OK
    };
    Ok(Outcome { artifacts, seed: Some(a.seed), code })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        assert_eq!(linear_grid(-4.0, 2.0, 1.0).unwrap().len(), 7);
        assert_eq!(linear_grid(0.0, 1.0, 0.1).unwrap().len(), 11);
        assert_eq!(linear_grid(0.0, 0.95, 0.1).unwrap().len(), 10);
        assert_eq!(linear_grid(1.0, 1.0, 0.5).unwrap(), vec![1.0]);
        assert!(matches!(linear_grid(0.0, 1.0, 0.0), Err(Error::Usage(_))));
        assert!(matches!(linear_grid(1.0, 0.0, 0.1), Err(Error::Usage(_))));
    }

    #[test]
    fn scale_ranges() {
        assert_eq!(parse_scales("4..9").unwrap(), ScaleRange { lo: 4, hi: 9 });
        assert!(parse_scales("4..5").is_err());
        assert!(parse_scales("4-9").is_err());
        assert!(parse_scales("a..9").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
