//! Monte Carlo estimates of `E|F₀′(re^{iθ})|^t`, their θ-integrals, and the
//! log-log slope that estimates the average integral means spectrum.
//!
//! Every path index owns one driving path; all quadrature nodes and all
//! scales of a run are integrated on it, so estimates at different scales are
//! positively correlated and their ratios are less noisy than independent runs.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponents::SleParams;
use crate::loewner::{integrate, DriverSpec, McConfig, PathState};
use crate::rng::NoiseKey;

/// Compensated values below `-CAP_NUMERATOR/|t|` are raised to it when `t < 0`.
pub const CAP_NUMERATOR: f64 = 30.0;
/// `exp` arguments above this are reported as overflow.
pub const EXP_LIMIT: f64 = 700.0;
pub const DEFAULT_THETA_MIN: f64 = PI / 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentVariant {
    Point { theta: f64 },
    Whole,
    Bulk { theta_min: f64 },
}

impl MomentVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            MomentVariant::Point { .. } => "point",
            MomentVariant::Whole => "whole",
            MomentVariant::Bulk { .. } => "bulk",
        }
    }
}

impl fmt::Display for MomentVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    /// Apply the negative-moment cap.
    pub cap_negative: bool,
    /// Multiplies the number of θ nodes.
    pub grid_density: f64,
    /// Nodes on `[θ_min, π]` for the bulk integral at density 1.
    pub bulk_nodes: usize,
    /// Drive every path with the negated noise.
    pub mirrored: bool,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self { cap_negative: true, grid_density: 1.0, bulk_nodes: 9, mirrored: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub r_minus_1: f64,
    pub t: f64,
    pub mean: f64,
    /// `log(mean)`, finite even when `mean` is not representable.
    pub log_mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub variant: MomentVariant,
    /// Paths with at least one capped value.
    pub capped_paths: usize,
    /// Paths with at least one trajectory that hit `s_max` before `r_stop`.
    pub horizon_paths: usize,
}

impl MomentEstimate {
    pub fn capped_fraction(&self) -> f64 {
        self.capped_paths as f64 / self.n_paths as f64
    }

    /// Standard error of `log(mean)` by the delta method.
    pub fn log_stderr(&self) -> f64 {
        self.stderr / self.mean
    }
}

/// Mean and standard error of `exp(y_i)` from the `y_i`, shifted by their
/// maximum so no term overflows.
#[derive(Debug, Clone, Default)]
pub struct LogMeanAccumulator {
    values: Vec<f64>,
}

/// `mean = exp(shift)·rel_mean`, `stderr = exp(shift)·rel_stderr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMean {
    pub shift: f64,
    pub rel_mean: f64,
    pub rel_stderr: f64,
    pub n: usize,
}

impl LogMean {
    pub fn log_mean(&self) -> f64 {
        self.shift + self.rel_mean.ln()
    }
}

impl LogMeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, y: f64) {
        self.values.push(y);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn finish(&self) -> Result<LogMean> {
        let n = self.values.len();
        if n == 0 {
            return Err(Error::Domain("no samples".into()));
        }
        let shift = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::Overflow(shift));
        }
        let (mut s1, mut s2) = (0.0, 0.0);
        for &y in &self.values {
            let e = (y - shift).exp();
            s1 += e;
            s2 += e * e;
        }
        let nf = n as f64;
        let m = s1 / nf;
        let var = if n > 1 { ((s2 / nf - m * m) * nf / (nf - 1.0)).max(0.0) } else { 0.0 };
        Ok(LogMean { shift, rel_mean: m, rel_stderr: (var / nf).sqrt(), n })
    }
}

/// `log Σ exp(x_i)`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Nodes and trapezoid log-weights for `∫_{-π}^{π} · dθ` of an even function
/// (or a single node of weight 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl Quadrature {
    pub fn point(theta: f64) -> Self {
        Self { nodes: vec![theta], log_weights: vec![0.0] }
    }

    /// Trapezoid rule on increasing nodes of `[a, π]`, doubled for `[-π, -a]`.
    fn symmetric_trapezoid(nodes: Vec<f64>) -> Self {
        let n = nodes.len();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let half = 0.5 * (nodes[i + 1] - nodes[i]);
            w[i] += half;
            w[i + 1] += half;
        }
        Self { nodes, log_weights: w.iter().map(|x| (2.0 * x).ln()).collect() }
    }

    /// Uniform nodes on `[θ_min, π]`.
    pub fn bulk(theta_min: f64, n_nodes: usize) -> Self {
        let n = n_nodes.max(2);
        let nodes = (0..n).map(|i| theta_min + (PI - theta_min) * i as f64 / (n - 1) as f64).collect();
        Self::symmetric_trapezoid(nodes)
    }

    /// Node at 0, then a geometric run from `(r-1)/2` (ratio `1.5^{1/density}`)
    /// up to `π/8`, then uniform cells of about `π/(16·density)` up to `π`.
    pub fn whole(r_minus_1: f64, density: f64) -> Self {
        let ratio = 1.5f64.powf(1.0 / density);
        let knee = PI / 8.0;
        let mut nodes = vec![0.0];
        let mut th = 0.5 * r_minus_1;
        while th < knee {
            nodes.push(th);
            th *= ratio;
        }
        let last = *nodes.last().unwrap();
        let cells = (((PI - last) / (PI / 16.0)) * density).ceil().max(1.0) as usize;
        for i in 1..=cells {
            nodes.push(last + (PI - last) * i as f64 / cells as f64);
        }
        *nodes.last_mut().unwrap() = PI;
        Self::symmetric_trapezoid(nodes)
    }

    pub fn for_variant(variant: MomentVariant, r_minus_1: f64, opts: &EstimatorOptions) -> Self {
        match variant {
            MomentVariant::Point { theta } => Self::point(theta),
            MomentVariant::Whole => Self::whole(r_minus_1, opts.grid_density),
            MomentVariant::Bulk { theta_min } => {
                Self::bulk(theta_min, ((opts.bulk_nodes as f64 - 1.0) * opts.grid_density).round() as usize + 1)
            }
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.log_weights.iter().map(|w| w.exp()).sum()
    }
}

/// Per-path summary at one scale.
#[derive(Debug, Clone, Copy)]
struct PathRecord {
    log_value: f64,
    capped: bool,
    horizon: bool,
}

fn check_driver(p: SleParams, cfg: &McConfig) -> Result<()> {
    if let DriverSpec::BrownianCircle { kappa } = cfg.driver {
        if (kappa - p.kappa).abs() > 1e-12 * p.kappa {
            return Err(Error::Usage(format!("driver κ = {kappa} differs from κ = {}", p.kappa)));
        }
    }
    Ok(())
}

/// Estimates at each `(r - 1, quadrature)` pair from one set of paths.
pub fn estimate_batch(
    p: SleParams,
    scales: &[f64],
    quads: &[Quadrature],
    variant: MomentVariant,
    cfg: &McConfig,
    opts: &EstimatorOptions,
) -> Result<Vec<MomentEstimate>> {
    cfg.validate()?;
    check_driver(p, cfg)?;
    if scales.len() != quads.len() {
        return Err(Error::Usage("one quadrature per scale required".into()));
    }
    if let Some(h) = scales.iter().find(|h| !(**h > 0.0)) {
        return Err(Error::Domain(format!("r - 1 must be positive, got {h}")));
    }
    let t = p.t;
    let floor = if opts.cap_negative && t < 0.0 { -CAP_NUMERATOR / t.abs() } else { f64::NEG_INFINITY };
    let level = cfg.base_level();
    let horizon = cfg.horizon_ticks();
    let records: Vec<Vec<PathRecord>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<PathRecord>> {
            let path = cfg.driving_path(NoiseKey::new(cfg.master_seed, i), opts.mirrored);
            let mut out = Vec::with_capacity(scales.len());
            let mut terms = Vec::new();
            for (&h, quad) in scales.iter().zip(quads) {
                terms.clear();
                let (mut capped, mut hit) = (false, false);
                for (&theta, &lw) in quad.nodes.iter().zip(&quad.log_weights) {
                    let v = if t == 0.0 {
                        0.0
                    } else {
                        let o = integrate(PathState::from_rm1(h, theta)?, &path, level, cfg.near_factor, cfg.r_stop, horizon)?;
                        hit |= o.horizon_reached;
                        if o.value < floor {
                            capped = true;
                            floor
                        } else {
                            o.value
                        }
                    };
                    terms.push(lw + t * v);
                }
                out.push(PathRecord { log_value: log_sum_exp(&terms), capped, horizon: hit });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut estimates = Vec::with_capacity(scales.len());
    for (k, &h) in scales.iter().enumerate() {
        let mut acc = LogMeanAccumulator::new();
        let (mut capped, mut hit) = (0, 0);
        for rec in &records {
            let r = rec[k];
            acc.push(r.log_value);
            capped += r.capped as usize;
            hit += r.horizon as usize;
        }
        let lm = acc.finish()?;
        let log_mean = lm.log_mean();
        if log_mean > EXP_LIMIT {
            return Err(Error::Overflow(log_mean));
        }
        let scale = lm.shift.exp();
        estimates.push(MomentEstimate {
            r_minus_1: h,
            t,
            mean: log_mean.exp(),
            log_mean,
            stderr: scale * lm.rel_stderr,
            n_paths: cfg.n_paths,
            variant,
            capped_paths: capped,
            horizon_paths: hit,
        });
    }
    Ok(estimates)
}

/// `E|F₀′(re^{iθ})|^t` at one point.
pub fn point_moment(p: SleParams, r: f64, theta: f64, cfg: &McConfig) -> Result<MomentEstimate> {
    point_moment_with(p, r - 1.0, theta, cfg, &EstimatorOptions::default())
}

pub fn point_moment_with(
    p: SleParams,
    r_minus_1: f64,
    theta: f64,
    cfg: &McConfig,
    opts: &EstimatorOptions,
) -> Result<MomentEstimate> {
    let variant = MomentVariant::Point { theta };
    Ok(estimate_batch(p, &[r_minus_1], &[Quadrature::point(theta)], variant, cfg, opts)?.remove(0))
}

/// `E ∫ |F₀′(re^{iθ})|^t dθ` over the circle (whole) or over `|θ| ≥ θ_min` (bulk).
pub fn integrated_moment(p: SleParams, r: f64, variant: MomentVariant, cfg: &McConfig) -> Result<MomentEstimate> {
    integrated_moment_with(p, r - 1.0, variant, cfg, &EstimatorOptions::default())
}

pub fn integrated_moment_with(
    p: SleParams,
    r_minus_1: f64,
    variant: MomentVariant,
    cfg: &McConfig,
    opts: &EstimatorOptions,
) -> Result<MomentEstimate> {
    let quad = Quadrature::for_variant(variant, r_minus_1, opts);
    Ok(estimate_batch(p, &[r_minus_1], &[quad], variant, cfg, opts)?.remove(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    /// `r - 1`, strictly decreasing.
    pub scales: Vec<f64>,
    pub estimates: Vec<MomentEstimate>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
}

/// `r - 1 = 2^{-k}` for `k = lo..=hi`.
pub fn dyadic_scales(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|k| (-(k as f64)).exp2()).collect()
}

/// Weighted least squares of `y` against `x` with standard errors `sy`.
/// Falls back to ordinary least squares (residual-based error) when any
/// `sy` is zero. Returns `(slope, slope_stderr, intercept)`.
pub fn weighted_line_fit(x: &[f64], y: &[f64], sy: &[f64]) -> (f64, f64, f64) {
    let n = x.len();
    let weighted = sy.iter().all(|s| *s > 0.0 && s.is_finite());
    let w: Vec<f64> = if weighted { sy.iter().map(|s| 1.0 / (s * s)).collect() } else { vec![1.0; n] };
    let sw: f64 = w.iter().sum();
    let xm = w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * (x - xm).powi(2)).sum();
    let sxy: f64 = (0..n).map(|i| w[i] * (x[i] - xm) * (y[i] - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let stderr = if weighted {
        (1.0 / sxx).sqrt()
    } else if n > 2 {
        let rss: f64 = (0..n).map(|i| (y[i] - intercept - slope * x[i]).powi(2)).sum();
        (rss / (n as f64 - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, stderr, intercept)
}

/// Slope of `log E∫|F₀′|^t` against `-log(r-1)`.
pub fn fit_spectrum_slope(p: SleParams, variant: MomentVariant, scales: &[f64], cfg: &McConfig) -> Result<SlopeFit> {
    fit_spectrum_slope_with(p, variant, scales, cfg, &EstimatorOptions::default())
}

pub fn fit_spectrum_slope_with(
    p: SleParams,
    variant: MomentVariant,
    scales: &[f64],
    cfg: &McConfig,
    opts: &EstimatorOptions,
) -> Result<SlopeFit> {
    if scales.len() < 3 {
        return Err(Error::InsufficientScales { needed: 3, got: scales.len() });
    }
    if scales.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("scales must be strictly decreasing".into()));
    }
    let quads: Vec<Quadrature> = scales.iter().map(|&h| Quadrature::for_variant(variant, h, opts)).collect();
    let estimates = estimate_batch(p, scales, &quads, variant, cfg, opts)?;
    let x: Vec<f64> = scales.iter().map(|h| -h.ln()).collect();
    let y: Vec<f64> = estimates.iter().map(|e| e.log_mean).collect();
    let sy: Vec<f64> = estimates.iter().map(|e| e.log_stderr()).collect();
    let (slope, slope_stderr, intercept) = weighted_line_fit(&x, &y, &sy);
    Ok(SlopeFit { scales: scales.to_vec(), estimates, slope, slope_stderr, intercept })
}
