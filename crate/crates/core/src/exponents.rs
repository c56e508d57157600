//! Closed-form exponents, phase-transition thresholds and spectrum curves.
//!
//! Everything here is a pure function of `(κ, t)`. The average integral means
//! spectrum has three pieces: a tip piece for very negative `t` (only when the
//! growth point is included), an analytic piece `β̃(t) = -β(t)`, and a linear
//! piece of slope one past `t* = 3(4+κ)²/(32κ)`.

use std::fmt;

use crate::error::{Error, Result};

/// Tolerance used to decide that `κ` is exactly 4 where the closed forms are 0/0.
pub const KAPPA_FOUR_EPS: f64 = 1e-12;

/// Upper end of the `α` range searched by [`legendre_check`].
pub const LEGENDRE_ALPHA_CAP: f64 = 1e4;

/// The pair `(κ, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SleParams {
    pub kappa: f64,
    pub t: f64,
}

impl SleParams {
    pub fn new(kappa: f64, t: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::Domain(format!("kappa must be positive and finite, got {kappa}")));
        }
        if !t.is_finite() {
            return Err(Error::Domain(format!("t must be finite, got {t}")));
        }
        Ok(Self { kappa, t })
    }

    /// `(4+κ)² - 8tκ ≥ 0`, i.e. `t ≤ (4+κ)²/(8κ)`.
    pub fn in_analytic_domain(&self) -> bool {
        self.discriminant() >= 0.0
    }

    pub fn discriminant(&self) -> f64 {
        let s = 4.0 + self.kappa;
        s * s - 8.0 * self.t * self.kappa
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds::for_kappa(self.kappa)
    }
}

/// Which piece of a piecewise spectrum produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Tip,
    Analytic,
    Linear,
    /// Zero part of `f⁺ = max(f, 0)`.
    Truncated,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Tip => "tip",
            Branch::Analytic => "analytic",
            Branch::Linear => "linear",
            Branch::Truncated => "truncated",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Phase-transition points of the average spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// `-1 - 3κ/8`, where `γ = -1/2`.
    pub t_tip: f64,
    /// `3(4+κ)²/(32κ)`, where the analytic piece reaches slope one.
    pub t_star: f64,
}

impl Thresholds {
    pub fn for_kappa(kappa: f64) -> Self {
        let s = 4.0 + kappa;
        Self {
            t_tip: -1.0 - 3.0 * kappa / 8.0,
            t_star: 3.0 * s * s / (32.0 * kappa),
        }
    }
}

/// `γ`, `β` and the branch of the whole-SLE spectrum at `(κ, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub gamma: f64,
    pub beta: f64,
    pub branch: Branch,
    pub thresholds: Thresholds,
}

impl Exponents {
    pub fn new(p: SleParams) -> Result<Self> {
        let gamma = gamma_exponent(p)?;
        let beta = p.t - (4.0 + p.kappa) * gamma / 2.0;
        let thresholds = p.thresholds();
        let branch = if p.t <= thresholds.t_tip {
            Branch::Tip
        } else if p.t <= thresholds.t_star {
            Branch::Analytic
        } else {
            Branch::Linear
        };
        Ok(Self { gamma, beta, branch, thresholds })
    }
}

/// Whole hull (tip included) or bulk (tip excluded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Whole,
    Bulk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumVariant {
    WholeSle,
    Bulk,
    ConjecturedAlmostSure,
    DuplantierF,
    DuplantierFPlus,
}

impl SpectrumVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumVariant::WholeSle => "whole",
            SpectrumVariant::Bulk => "bulk",
            SpectrumVariant::ConjecturedAlmostSure => "conjectured",
            SpectrumVariant::DuplantierF => "f",
            SpectrumVariant::DuplantierFPlus => "fplus",
        }
    }
}

/// Sampled spectrum. For the `DuplantierF*` variants the abscissa is `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub kappa: f64,
    pub variant: SpectrumVariant,
    pub samples: Vec<(f64, f64, Branch)>,
}

pub fn gamma_exponent(p: SleParams) -> Result<f64> {
    let disc = p.discriminant();
    if disc < 0.0 {
        return Err(Error::Domain(format!(
            "t = {} exceeds (4+κ)²/(8κ) = {}",
            p.t,
            (4.0 + p.kappa).powi(2) / (8.0 * p.kappa)
        )));
    }
    Ok((4.0 + p.kappa - disc.sqrt()) / (2.0 * p.kappa))
}

/// `β = t - (4+κ)γ/2`; the analytic spectrum is `-β`.
pub fn beta_exponent(p: SleParams) -> Result<f64> {
    Ok(p.t - (4.0 + p.kappa) * gamma_exponent(p)? / 2.0)
}

/// `β̃(t) = -β(t)`, defined for `t ≤ (4+κ)²/(8κ)`.
pub fn beta_tilde(p: SleParams) -> Result<f64> {
    Ok(-beta_exponent(p)?)
}

/// Derivative of `β̃` in `t`.
pub fn beta_tilde_slope(p: SleParams) -> Result<f64> {
    let disc = p.discriminant();
    if disc <= 0.0 {
        return Err(Error::Domain(format!("β̃' undefined at t = {}", p.t)));
    }
    Ok(-1.0 + (4.0 + p.kappa) / disc.sqrt())
}

/// Average integral means spectrum of the whole SLE hull or of its bulk.
pub fn average_spectrum(p: SleParams, region: Region) -> (f64, Branch) {
    let th = p.thresholds();
    let s = 4.0 + p.kappa;
    if p.t > th.t_star {
        return (p.t - s * s / (16.0 * p.kappa), Branch::Linear);
    }
    // t ≤ t_star < (4+κ)²/(8κ): the square root is real.
    let gamma = (s - p.discriminant().sqrt()) / (2.0 * p.kappa);
    let beta = p.t - s * gamma / 2.0;
    if region == Region::Whole && p.t <= th.t_tip {
        (-beta - 2.0 * gamma - 1.0, Branch::Tip)
    } else {
        (-beta, Branch::Analytic)
    }
}

/// Any Hölder exponent below this value is admissible for the SLE map.
pub fn holder_exponent(kappa: f64) -> f64 {
    let mu = (4.0 + kappa).powi(2) / (4.0 * kappa);
    1.0 - 1.0 / mu - (1.0 / (mu * mu) + 2.0 / mu).sqrt()
}

/// Upper bound `1 + 2/κ` on the dimension of the hull boundary, `κ ≥ 4`.
pub fn boundary_dimension_bound(kappa: f64) -> Result<f64> {
    if !(kappa >= 4.0) {
        return Err(Error::Domain(format!("boundary bound needs kappa >= 4, got {kappa}")));
    }
    Ok(1.0 + 2.0 / kappa)
}

pub fn central_charge(kappa: f64) -> f64 {
    (6.0 - kappa) * (6.0 - 16.0 / kappa) / 4.0
}

/// Duplantier's multifractal spectrum `f(α)`; negative values are allowed.
pub fn duplantier_f(alpha: f64, kappa: f64) -> Result<f64> {
    if !(alpha > 0.5) {
        return Err(Error::Domain(format!("f(α) needs α > 1/2, got {alpha}")));
    }
    let c = central_charge(kappa);
    Ok(alpha - (25.0 - c) * (alpha - 1.0).powi(2) / (12.0 * (2.0 * alpha - 1.0)))
}

/// `f⁺ = max(f, 0)` with its branch tag.
pub fn duplantier_f_plus(alpha: f64, kappa: f64) -> Result<(f64, Branch)> {
    let f = duplantier_f(alpha, kappa)?;
    Ok(if f > 0.0 { (f, Branch::Analytic) } else { (0.0, Branch::Truncated) })
}

/// Endpoints of the support of `f⁺`. `alpha_max` is `+∞` at `κ = 4`.
pub fn alpha_extremes(kappa: f64) -> (f64, f64) {
    if (kappa - 4.0).abs() < KAPPA_FOUR_EPS {
        return (2.0 / 3.0, f64::INFINITY);
    }
    let n = 16.0 + 4.0 * kappa + kappa * kappa;
    let s = 2.0 * 2f64.sqrt() * (16.0 * kappa + 10.0 * kappa * kappa + kappa.powi(3)).sqrt();
    let d = (4.0 - kappa).powi(2);
    // n² - s² = (κ-4)²(κ+4)², so the small root is rewritten without cancellation.
    let alpha_min = (4.0 + kappa).powi(2) / (n + s);
    (alpha_min, (n + s) / d)
}

/// `μ = (4+κ)²/(4κ)`.
pub fn mu(kappa: f64) -> f64 {
    (4.0 + kappa).powi(2) / (4.0 * kappa)
}

/// Points where the tangent to `β̃` passes through `(0, -1)`.
pub fn t_extremes(kappa: f64) -> (f64, f64) {
    let mu = mu(kappa);
    let root = (1.0 + 2.0 * mu).sqrt();
    (
        (-1.0 - 2.0 * mu - (1.0 + mu) * root) / mu,
        (-1.0 - 2.0 * mu + (1.0 + mu) * root) / mu,
    )
}

/// Tangent line written through `α`: `t(1 - 1/α) - 1`.
pub fn tangent_line_alpha(t: f64, alpha: f64) -> f64 {
    t * (1.0 - 1.0 / alpha) - 1.0
}

/// Tangent line written through the contact point: `t(1/√(1-2t_c/μ) - 1) - 1`.
pub fn tangent_line_contact(t: f64, t_contact: f64, kappa: f64) -> f64 {
    t * (1.0 / (1.0 - 2.0 * t_contact / mu(kappa)).sqrt() - 1.0) - 1.0
}

/// Conjectured almost-sure spectrum: `β̃` between `t_min` and `t_max`,
/// continued by the tangents through `(0, -1)` outside.
pub fn conjectured_as_spectrum(p: SleParams) -> (f64, Branch) {
    let (t_min, t_max) = t_extremes(p.kappa);
    let (alpha_min, alpha_max) = alpha_extremes(p.kappa);
    if p.t <= t_min {
        let v = tangent_line_alpha(p.t, alpha_min);
        debug_assert!((v - tangent_line_contact(p.t, t_min, p.kappa)).abs() <= 1e-9 * (1.0 + p.t.abs()));
        (v, Branch::Linear)
    } else if p.t >= t_max {
        let v = tangent_line_alpha(p.t, alpha_max);
        debug_assert!((v - tangent_line_contact(p.t, t_max, p.kappa)).abs() <= 1e-9 * (1.0 + p.t.abs()));
        (v, Branch::Linear)
    } else {
        // t_max < (4+κ)²/(8κ), so the interior is inside the analytic domain.
        let s = 4.0 + p.kappa;
        (-p.t + s * (s - p.discriminant().sqrt()) / (4.0 * p.kappa), Branch::Analytic)
    }
}

/// Numerical Legendre transform `sup_α (f(α) - t)/α` over `α ∈ (1/2, min(α_max, 10⁴)]`.
///
/// A log-spaced coarse scan brackets the maximiser, golden-section search
/// refines it.
pub fn legendre_check(kappa: f64, t: f64) -> Result<f64> {
    let (t_min, t_max) = t_extremes(kappa);
    if !(t > t_min && t < t_max) {
        return Err(Error::Domain(format!("t = {t} outside ({t_min}, {t_max})")));
    }
    let (_, alpha_max) = alpha_extremes(kappa);
    let lo: f64 = 0.5 + 1e-6;
    let hi: f64 = alpha_max.min(LEGENDRE_ALPHA_CAP);
    let objective = |alpha: f64| -> f64 {
        // alpha > 1/2 on the whole search interval.
        (duplantier_f(alpha, kappa).unwrap_or(f64::NEG_INFINITY) - t) / alpha
    };

    const COARSE: usize = 4000;
    let (llo, lhi) = ((lo - 0.5).ln(), (hi - 0.5).ln());
    let node = |i: usize| 0.5 + (llo + (lhi - llo) * i as f64 / COARSE as f64).exp();
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..=COARSE {
        let v = objective(node(i));
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    if !best_val.is_finite() {
        return Err(Error::Optimization("objective not finite on the coarse grid".into()));
    }
    let mut a = node(best.saturating_sub(1));
    let mut b = node((best + 1).min(COARSE));
    if best == 0 || best == COARSE {
        // Maximum on the boundary of the search box: the sup is the boundary value.
        return Ok(best_val);
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    let refined = objective(0.5 * (a + b)).max(fc).max(fd);
    if refined + 1e-12 < best_val {
        return Err(Error::Optimization("golden-section search lost the bracket".into()));
    }
    Ok(refined.max(best_val))
}

/// Evaluate one spectrum variant on an ordered grid.
pub fn spectrum_table(kappa: f64, grid: &[f64], variant: SpectrumVariant) -> Result<SpectrumCurve> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("grid contains non-finite values".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("grid must be strictly increasing".into()));
    }
    let mut samples = Vec::with_capacity(grid.len());
    for &x in grid {
        let sample = match variant {
            SpectrumVariant::WholeSle => average_spectrum(SleParams::new(kappa, x)?, Region::Whole),
            SpectrumVariant::Bulk => average_spectrum(SleParams::new(kappa, x)?, Region::Bulk),
            SpectrumVariant::ConjecturedAlmostSure => conjectured_as_spectrum(SleParams::new(kappa, x)?),
            SpectrumVariant::DuplantierF => (duplantier_f(x, kappa)?, Branch::Analytic),
            SpectrumVariant::DuplantierFPlus => duplantier_f_plus(x, kappa)?,
        };
        samples.push((x, sample.0, sample.1));
    }
    Ok(SpectrumCurve { kappa, variant, samples })
}
