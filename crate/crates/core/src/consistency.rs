//! Two-sample Monte Carlo checks of distributional identities of the flow:
//! composition of independent driving increments, and convergence of the
//! compensated derivative `log|f_s′| - s` as `s → ∞`.
//!
//! Each side of a comparison uses its own noise, so agreement within a few
//! combined standard errors is a genuine statistical test.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponents::SleParams;
use crate::loewner::{integrate, DrivingPath, McConfig, PathState, TICKS_PER_UNIT};
use crate::moments::LogMeanAccumulator;
use crate::rng::NoiseKey;

const TAG_DIRECT: u32 = 10;
const TAG_FIRST: u32 = 11;
const TAG_SECOND: u32 = 12;
const TAG_SHORT: u32 = 13;
const TAG_LONG: u32 = 14;

/// Mean of `exp(t·v)` over paths with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMean {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSampleCheck {
    pub a: SampleMean,
    pub b: SampleMean,
    /// `|a - b| / sqrt(se_a² + se_b²)`.
    pub z: f64,
}

impl TwoSampleCheck {
    fn new(a: SampleMean, b: SampleMean) -> Self {
        let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        Self { a, b, z: (a.mean - b.mean).abs() / se }
    }

    pub fn passed(&self, k_sigma: f64) -> bool {
        self.z <= k_sigma
    }
}

fn sample_mean(t: f64, values: &[f64]) -> Result<SampleMean> {
    let mut acc = LogMeanAccumulator::new();
    for &v in values {
        acc.push(t * v);
    }
    let lm = acc.finish()?;
    let scale = lm.shift.exp();
    if !scale.is_finite() {
        return Err(Error::Overflow(lm.log_mean()));
    }
    Ok(SampleMean { mean: scale * lm.rel_mean, stderr: scale * lm.rel_stderr, n: lm.n })
}

fn check_inputs(z0: (f64, f64), horizon: f64, cfg: &McConfig) -> Result<()> {
    cfg.validate()?;
    PathState::new(z0.0, z0.1)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    Ok(())
}

/// Compensated value after running for exactly `horizon` with no radial stop.
fn run(start: PathState, cfg: &McConfig, key: NoiseKey, horizon: f64) -> Result<PathState> {
    let path = DrivingPath::new(cfg.driver, key, cfg.base_level(), horizon, false);
    let ticks = (horizon * TICKS_PER_UNIT as f64).round() as u64;
    Ok(integrate(start, &path, cfg.base_level(), cfg.near_factor, f64::INFINITY, ticks)?.state)
}

/// `E exp(t(log|f_{2T}′(z₀)| - 2T))` from one run of length `2T` against the
/// composition of two independent runs of length `T`, the second started
/// from the end state of the first.
pub fn markov_composition_check(p: SleParams, z0: (f64, f64), half: f64, cfg: &McConfig) -> Result<TwoSampleCheck> {
    check_inputs(z0, half, cfg)?;
    let start = PathState::new(z0.0, z0.1)?;
    let pairs: Vec<(f64, f64)> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let key = NoiseKey::new(cfg.master_seed, i);
            let direct = run(start, cfg, key.with_tag(TAG_DIRECT), 2.0 * half)?;
            let mid = run(start, cfg, key.with_tag(TAG_FIRST), half)?;
            let composed = run(mid, cfg, key.with_tag(TAG_SECOND), half)?;
            Ok((direct.compensated(), composed.compensated()))
        })
        .collect::<Result<_>>()?;
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(TwoSampleCheck::new(sample_mean(p.t, &a)?, sample_mean(p.t, &b)?))
}

/// `E exp(t(log|f_s′(z₀)| - s))` at `s = S` and at `s = 2S`, independent
/// noise for the two horizons.
pub fn stationarity_check(p: SleParams, z0: (f64, f64), horizon: f64, cfg: &McConfig) -> Result<TwoSampleCheck> {
    check_inputs(z0, horizon, cfg)?;
    let start = PathState::new(z0.0, z0.1)?;
    let pairs: Vec<(f64, f64)> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let key = NoiseKey::new(cfg.master_seed, i);
            let short = run(start, cfg, key.with_tag(TAG_SHORT), horizon)?;
            let long = run(start, cfg, key.with_tag(TAG_LONG), 2.0 * horizon)?;
            Ok((short.compensated(), long.compensated()))
        })
        .collect::<Result<_>>()?;
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(TwoSampleCheck::new(sample_mean(p.t, &a)?, sample_mean(p.t, &b)?))
}
