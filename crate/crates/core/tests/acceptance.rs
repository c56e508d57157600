//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Positional arguments select criteria by number (`cargo test --test
//! acceptance -- 1 5`); with none, all ten run.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{OracleBranch, Stream};
use sle_spectrum::consistency::{markov_composition_check, stationarity_check};
use sle_spectrum::exponents::{
    alpha_extremes, average_spectrum, beta_exponent, beta_tilde, boundary_dimension_bound, gamma_exponent,
    legendre_check, t_extremes, Branch, Region, SleParams,
};
use sle_spectrum::loewner::McConfig;
use sle_spectrum::moments::{dyadic_scales, fit_spectrum_slope, MomentVariant, SlopeFit};
use sle_spectrum::special::boundary::positivity_threshold;
use sle_spectrum::verify::{ansatz_suite, chordal_suite, hypergeometric_suite, subsuper_suite, CheckRow};
use sle_spectrum::Error;

type Outcome = Result<String, String>;

const KAPPAS: [f64; 7] = [0.5, 2.0, 8.0 / 3.0, 4.0, 6.0, 8.0, 16.0];
const PDE_PAIRS: [(f64, f64); 3] = [(6.0, 1.0), (2.0, -1.0), (8.0 / 3.0, 0.5)];

fn sp(kappa: f64, t: f64) -> SleParams {
    SleParams::new(kappa, t).unwrap()
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn all_pass(rows: &[CheckRow]) -> Result<(), String> {
    match rows.iter().find(|r| !r.pass) {
        None => Ok(()),
        Some(r) => Err(format!("{} failed at κ={} t={} {}: value {:e}", r.check, r.kappa, r.t, r.location, r.value)),
    }
}

fn oracle_branch(b: Branch) -> Option<OracleBranch> {
    match b {
        Branch::Tip => Some(OracleBranch::Tip),
        Branch::Analytic => Some(OracleBranch::Analytic),
        Branch::Linear => Some(OracleBranch::Linear),
        Branch::Truncated => None,
    }
}

fn criterion_1() -> Outcome {
    // Three t per κ: one per branch of the whole-plane spectrum.
    let mut pairs = Vec::new();
    for &k in &KAPPAS {
        let (t_tip, t_star) = common::thresholds(k);
        pairs.push((k, t_tip - 1.0));
        pairs.push((k, 0.5 * (t_tip + t_star)));
        pairs.push((k, t_star + 0.75));
    }
    pairs.truncate(20);
    let mut worst = 0.0f64;
    let mut seen = [false; 3];
    for &(k, t) in &pairs {
        for (region, tip) in [(Region::Whole, true), (Region::Bulk, false)] {
            let (v, b) = average_spectrum(sp(k, t), region);
            let (ov, ob) = common::spectrum(k, t, tip);
            ensure(oracle_branch(b) == Some(ob), format!("branch {b:?} vs {ob:?} at ({k}, {t})"))?;
            let err = (v - ov).abs() / ov.abs().max(1.0);
            ensure(err <= 1e-12, format!("({k}, {t}, {region:?}): {v} vs oracle {ov}"))?;
            worst = worst.max(err);
            seen[ob as usize] = true;
        }
    }
    ensure(seen.iter().all(|s| *s), "not every branch was exercised".into())?;
    let (_, t_max) = t_extremes(4.0);
    ensure((t_max - 1.5).abs() <= 1e-12, format!("t_max(4) = {t_max}"))?;
    let (a_min, a_max) = alpha_extremes(4.0);
    ensure((a_min - 2.0 / 3.0).abs() <= 1e-12 && a_max == f64::INFINITY, format!("α extremes at 4: {a_min}, {a_max}"))?;
    let d = boundary_dimension_bound(6.0).unwrap();
    ensure((d - 4.0 / 3.0).abs() <= 1e-12, format!("dimension bound at 6: {d}"))?;
    Ok(format!("{} pairs × 2 regions, worst rel err {worst:.1e}", pairs.len()))
}

fn criterion_2() -> Outcome {
    let mut rng = Stream::new(2024);
    let (mut tip_gap, mut star_gap, mut slope_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let k = rng.uniform(0.1, 20.0);
        let (t_tip, t_star) = common::thresholds(k);
        let p = sp(k, t_tip);
        let (g, b) = (gamma_exponent(p).unwrap(), beta_exponent(p).unwrap());
        tip_gap = tip_gap.max(((-b - 2.0 * g - 1.0) - (-b)).abs());
        let p = sp(k, t_star);
        let linear = t_star - (4.0 + k).powi(2) / (16.0 * k);
        star_gap = star_gap.max((beta_tilde(p).unwrap() - linear).abs());
        let e = 1e-5;
        let slope = (beta_tilde(sp(k, t_star + e)).unwrap() - beta_tilde(sp(k, t_star - e)).unwrap()) / (2.0 * e);
        slope_err = slope_err.max((slope - 1.0).abs());
    }
    let msg = format!("max |tip-analytic| {tip_gap:.1e}, |analytic-linear| {star_gap:.1e}, |slope-1| {slope_err:.1e}");
    ensure(tip_gap < 1e-9 && star_gap < 1e-9 && slope_err <= 1e-6, msg.clone())?;
    Ok(msg)
}

fn criterion_3() -> Outcome {
    let kappas = [0.5, 1.0, 2.0, 8.0 / 3.0, 3.5, 4.0, 5.0, 6.0, 8.0, 12.0];
    let mut worst = 0.0f64;
    let mut n = 0;
    for &k in &kappas {
        let (t_min, t_max) = t_extremes(k);
        for i in 0..10 {
            let t = t_min + (i as f64 + 0.5) / 10.0 * (t_max - t_min);
            let sup = legendre_check(k, t).map_err(|e| format!("({k}, {t}): {e}"))?;
            let expected = beta_tilde(sp(k, t)).unwrap() - t + 1.0;
            let err = (sup - expected).abs();
            ensure(err <= 1e-6, format!("({k}, {t}): sup {sup} vs {expected}"))?;
            worst = worst.max(err);
            n += 1;
        }
    }
    Ok(format!("{n} points, worst {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let kappas = [0.5, 2.0, 8.0 / 3.0, 4.0, 6.0, 8.0, 16.0];
    let fractions = [0.1, 0.45, 0.9];
    let mut n = 0;
    let mut worst_ode = 0.0f64;
    'outer: for &k in &kappas {
        let (lo, hi) = (positivity_threshold(k), common::thresholds(k).1);
        for &f in &fractions {
            if n == 20 {
                break 'outer;
            }
            let t = lo + f * (hi - lo);
            let rows = hypergeometric_suite(sp(k, t)).map_err(|e| format!("({k}, {t}): {e}"))?;
            all_pass(&rows)?;
            worst_ode = rows.iter().filter(|r| r.check == "ode_residual").fold(worst_ode, |m, r| m.max(r.value));
            n += 1;
        }
    }
    for &k in &kappas {
        let t = common::thresholds(k).1 * (1.0 + 1e-9) + 1e-9;
        match hypergeometric_suite(sp(k, t)) {
            Err(Error::ConditionViolated { .. }) => {}
            other => return Err(format!("κ={k}, t={t} just above the limit gave {other:?}")),
        }
    }
    Ok(format!("{n} pairs, worst ODE residual {worst_ode:.1e}, violation raised for all κ"))
}

fn criterion_5() -> Outcome {
    let pairs = [(0.5, 1.0), (2.0, -1.0), (8.0 / 3.0, 0.5), (4.0, 1.5), (4.0, -3.0), (6.0, 1.0), (6.0, -4.0), (8.0, 2.0), (16.0, -8.0), (16.0, 3.0)];
    let mut worst = 0.0f64;
    let mut control = f64::INFINITY;
    for &(k, t) in &pairs {
        let rows = chordal_suite(sp(k, t)).map_err(|e| e.to_string())?;
        all_pass(&rows)?;
        for r in &rows {
            if r.check == "chordal_residual" {
                worst = worst.max(r.value);
            } else {
                control = control.min(r.value);
            }
        }
    }
    Ok(format!("{} pairs, worst residual {worst:.1e}, weakest control {control:.1e}", pairs.len()))
}

fn criterion_6() -> Outcome {
    let mut slopes = Vec::new();
    for &(k, t) in &PDE_PAIRS {
        let rows = ansatz_suite(sp(k, t)).map_err(|e| e.to_string())?;
        all_pass(&rows)?;
        let s = rows.iter().find(|r| r.check == "ansatz_slope").ok_or("no slope row")?;
        slopes.push(format!("{:.4}", s.value));
    }
    Ok(format!("slopes {}", slopes.join(", ")))
}

fn criterion_7() -> Outcome {
    let mut h0s = Vec::new();
    for &(k, t) in &PDE_PAIRS {
        let rows = subsuper_suite(sp(k, t)).map_err(|e| e.to_string())?;
        all_pass(&rows)?;
        let worst = rows.iter().filter(|r| r.check == "sign_h0").fold(f64::INFINITY, |m, r| m.min(r.value));
        h0s.push(format!("(κ={k:.3}, t={t}): h0 ≥ 2^{}", worst.log2().round()));
    }
    Ok(h0s.join("; "))
}

fn describe(fit: &SlopeFit) -> String {
    let capped = fit.estimates.iter().map(|e| e.capped_fraction()).fold(0.0, f64::max);
    format!("slope {:.5} ± {:.5}, max capped {:.3}%", fit.slope, fit.slope_stderr, 100.0 * capped)
}

fn slope_criterion(t: f64, variant: MomentVariant, target: f64, tol: f64) -> Outcome {
    let cfg = McConfig { n_paths: 100_000, master_seed: 1, ..McConfig::new(6.0) };
    let fit = fit_spectrum_slope(sp(6.0, t), variant, &dyadic_scales(4, 9), &cfg).map_err(|e| e.to_string())?;
    let capped = fit.estimates.iter().map(|e| e.capped_fraction()).fold(0.0, f64::max);
    let msg = format!("{} (target {target} ± {tol})", describe(&fit));
    ensure((fit.slope - target).abs() <= tol && capped < 0.01, msg.clone())?;
    Ok(msg)
}

fn criterion_8_bulk() -> Outcome {
    slope_criterion(1.0, MomentVariant::Bulk { theta_min: PI / 4.0 }, 0.16204, 0.05)
}

fn criterion_8_whole() -> Outcome {
    slope_criterion(-4.0, MomentVariant::Whole, 1.22797, 0.15)
}

fn criterion_9() -> Outcome {
    let cfg = McConfig { n_paths: 20_000, master_seed: 9, ..McConfig::new(6.0) };
    let p = sp(6.0, 1.0);
    let z0 = (1.5, PI / 2.0);
    let m = markov_composition_check(p, z0, 1.0, &cfg).map_err(|e| e.to_string())?;
    let s = stationarity_check(p, z0, 4.0, &cfg).map_err(|e| e.to_string())?;
    let msg = format!(
        "Markov {:.5} vs {:.5} (z = {:.2}); stationarity {:.5} vs {:.5} (z = {:.2})",
        m.a.mean, m.b.mean, m.z, s.a.mean, s.b.mean, s.z
    );
    ensure(m.passed(3.0) && s.passed(3.0), msg.clone())?;
    Ok(msg)
}

fn run_cli(args: &[&str], threads: usize, dir: &Path) -> Result<Vec<u8>, String> {
    let out = dir.join(format!("out-{threads}.csv"));
    let status = Command::new(env!("CARGO_BIN_EXE_sle-spectrum"))
        .args(args)
        .arg("--threads")
        .arg(threads.to_string())
        .arg("--out")
        .arg(&out)
        .arg("--log")
        .arg(dir.join("runs.log"))
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.code() == Some(0), format!("{args:?} exited with {status}"))?;
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let commands: [&[&str]; 5] = [
        &["estimate", "--kappa", "6", "--t", "1", "--variant", "bulk", "--scales", "4..7", "--paths", "400", "--seed", "3"],
        &["estimate", "--kappa", "6", "--t", "-4", "--variant", "whole", "--scales", "3..5", "--paths", "100", "--seed", "4"],
        &["hull", "--kappa", "6", "--time", "1", "--n-points", "512", "--seed", "5"],
        &["spectrum", "--kappa", "6", "--t-min", "-8", "--t-max", "3", "--t-step", "0.25", "--variant", "conjectured"],
        &["verify", "--suite", "subsuper", "--kappa", "6", "--t", "1"],
    ];
    let n = 4;
    for args in commands {
        let a = run_cli(args, 1, dir.path())?;
        let b = run_cli(args, 1, dir.path())?;
        let c = run_cli(args, n, dir.path())?;
        ensure(a == b, format!("{} differs between runs", args[0]))?;
        ensure(a == c, format!("{} differs between 1 and {n} threads", args[0]))?;
    }
    Ok(format!("{} commands byte-identical across reruns and 1 vs {n} threads", commands.len()))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 11] = [
        ("1", "exponent closed forms", criterion_1),
        ("2", "branch continuity and slope", criterion_2),
        ("3", "Legendre duality", criterion_3),
        ("4", "hypergeometric construction", criterion_4),
        ("5", "chordal exact solution", criterion_5),
        ("6", "radial ansatz scaling", criterion_6),
        ("7", "sub/supersolution signs", criterion_7),
        ("8", "Monte Carlo slope, bulk κ=6 t=1", criterion_8_bulk),
        ("8", "Monte Carlo slope, whole κ=6 t=-4", criterion_8_whole),
        ("9", "Markov and stationarity", criterion_9),
        ("10", "CLI determinism", criterion_10),
    ];
    let selected: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !selected.is_empty() && !selected.iter().any(|s| s == id) {
            continue;
        }
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("criterion {id:>2} PASS  {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
