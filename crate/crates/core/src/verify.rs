//! Named verification suites. Each returns one row per check; numeric
//! failures of the underlying routines (for instance a violated solvability
//! condition) are returned as errors rather than rows.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exponents::{beta_tilde, legendre_check, t_extremes, Exponents, SleParams};
use crate::pde::{
    ansatz_scaling, ansatz_scaling_with, chordal_operator_residual, chordal_residual_with, dyadic_ladder,
    ratio_log_slope, subsupersolution_sign,
};
use crate::special::boundary::{boundary_ode_residual, boundary_solutions, g3_at_4_closed_form, ConstantCandidate};

pub const ODE_TOL: f64 = 1e-8;
pub const CHORDAL_TOL: f64 = 1e-8;
pub const CONTROL_MIN: f64 = 1e-3;
pub const LIMIT_TOL: f64 = 1e-5;
pub const ORIGIN_TOL: f64 = 1e-10;
pub const ANSATZ_MIN_SLOPE: f64 = 0.9;
pub const CONTINUITY_TOL: f64 = 1e-9;
pub const SLOPE_TOL: f64 = 1e-6;
pub const LEGENDRE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Hypergeometric,
    Chordal,
    Ansatz,
    Subsuper,
    Exponents,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Hypergeometric, Suite::Chordal, Suite::Ansatz, Suite::Subsuper, Suite::Exponents];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Hypergeometric => "hypergeometric",
            Suite::Chordal => "chordal",
            Suite::Ansatz => "ansatz",
            Suite::Subsuper => "subsuper",
            Suite::Exponents => "exponents",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub kappa: f64,
    pub t: f64,
    pub location: String,
    pub value: f64,
    pub pass: bool,
}

impl CheckRow {
    fn new(check: &str, p: SleParams, location: String, value: f64, pass: bool) -> Self {
        Self { check: check.to_string(), kappa: p.kappa, t: p.t, location, value, pass }
    }
}

pub fn run_suite(suite: Suite, p: SleParams) -> Result<Vec<CheckRow>> {
    match suite {
        Suite::Hypergeometric => hypergeometric_suite(p),
        Suite::Chordal => chordal_suite(p),
        Suite::Ansatz => ansatz_suite(p),
        Suite::Subsuper => subsuper_suite(p),
        Suite::Exponents => exponents_suite(p),
    }
}

/// `g₃` against the boundary ODE at 200 interior points, its values at 0
/// and 4, and its sign on `[0, 3.99]`.
pub fn hypergeometric_suite(p: SleParams) -> Result<Vec<CheckRow>> {
    let sol = boundary_solutions(p)?;
    let mut rows = Vec::new();
    for i in 0..200 {
        let x = 4.0 * (i as f64 + 0.5) / 200.0;
        let r = boundary_ode_residual(&sol, x)?.abs();
        rows.push(CheckRow::new("ode_residual", p, format!("x={x}"), r, r < ODE_TOL));
    }
    let g0 = sol.g3(0.0)?;
    rows.push(CheckRow::new("g3_at_0", p, "x=0".into(), g0, (g0 - 1.0).abs() < ORIGIN_TOL));
    let lim = sol.g3_limit_at_4(1e-3)?;
    let closed = g3_at_4_closed_form(p)?;
    let err = (lim - closed).abs() / closed.abs().max(1.0);
    rows.push(CheckRow::new("g3_limit_at_4", p, format!("closed={closed}"), lim, err < LIMIT_TOL));
    let mut min = (f64::INFINITY, 0.0);
    for i in 0..400 {
        let x = 3.99 * i as f64 / 399.0;
        let v = sol.g3(x)?;
        if v < min.0 {
            min = (v, x);
        }
    }
    rows.push(CheckRow::new("g3_positive", p, format!("x={}", min.1), min.0, min.0 > 0.0));
    Ok(rows)
}

/// `y^β (x² + y²)^γ` against the chordal equation on a 10×10 grid of
/// `[-2, 2] × (0, 2]`, and a perturbed-exponent control.
pub fn chordal_suite(p: SleParams) -> Result<Vec<CheckRow>> {
    let e = Exponents::new(p)?;
    let mut rows = Vec::new();
    let mut control = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let x = -2.0 + 4.0 * i as f64 / 9.0;
            let y = 0.2 * (j + 1) as f64;
            let r = chordal_operator_residual(p, x, y)?.abs();
            rows.push(CheckRow::new("chordal_residual", p, format!("x={x};y={y}"), r, r < CHORDAL_TOL));
            control = control.max(chordal_residual_with(p, e.beta + 0.1, e.gamma, x, y)?.abs());
        }
    }
    rows.push(CheckRow::new("chordal_perturbed_control", p, "beta+0.1".into(), control, control > CONTROL_MIN));
    Ok(rows)
}

/// Scaling of `Λf/[(r-1)^β w^γ]` at `θ = π/2`, `r - 1 = 10^-2..10^-5`, and
/// the same with `g ≡ 1`.
pub fn ansatz_suite(p: SleParams) -> Result<Vec<CheckRow>> {
    let hs: Vec<f64> = (2..=5).map(|k| 10f64.powi(-k)).collect();
    let theta = PI / 2.0;
    let samples = ansatz_scaling(p, theta, &hs)?;
    let mut rows: Vec<CheckRow> = samples
        .iter()
        .map(|s| CheckRow::new("ansatz_ratio", p, format!("h={};theta={theta}", s.location.0 - 1.0), s.ratio, s.ratio.is_finite()))
        .collect();
    if p.t == 0.0 {
        let worst = samples.iter().fold(0.0f64, |m, s| m.max(s.ratio.abs()));
        rows.push(CheckRow::new("ansatz_exact_at_t0", p, format!("theta={theta}"), worst, worst < 1e-12));
        return Ok(rows);
    }
    let slope = ratio_log_slope(&samples);
    rows.push(CheckRow::new("ansatz_slope", p, format!("theta={theta}"), slope, slope >= ANSATZ_MIN_SLOPE));
    let control = ansatz_scaling_with(p, ConstantCandidate(1.0), theta, &hs)?;
    let smallest = control.iter().fold(f64::INFINITY, |m, s| m.min(s.ratio.abs()));
    rows.push(CheckRow::new("ansatz_constant_control", p, format!("theta={theta}"), smallest, smallest > CONTROL_MIN));
    Ok(rows)
}

/// Sign of `Λ(f·(-log(r-1))^δ)` for `δ = ±1, ±1/2` on the ladder
/// `2^-6..2^-20` at `θ = π/2`; the value column is `h₀` (NaN if none).
pub fn subsuper_suite(p: SleParams) -> Result<Vec<CheckRow>> {
    let ladder = dyadic_ladder(6, 20);
    let theta = PI / 2.0;
    let mut rows = Vec::new();
    let mut at_h = Vec::new();
    for delta in [-1.0, -0.5, 0.5, 1.0] {
        let rep = subsupersolution_sign(p, delta, theta, &ladder)?;
        let h0 = rep.h0.unwrap_or(f64::NAN);
        rows.push(CheckRow::new("sign_h0", p, format!("delta={delta};theta={theta}"), h0, rep.passed()));
        at_h.push(subsupersolution_sign(p, delta, theta, &[2f64.powi(-12)])?.samples[0].value);
    }
    let decreasing = at_h.windows(2).all(|w| w[1] < w[0]);
    let gap = at_h.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    rows.push(CheckRow::new("delta_monotone", p, "h=2^-12".into(), gap, decreasing));
    Ok(rows)
}

/// Continuity of the spectrum at both transitions for this `κ`, unit slope
/// at `t_star`, and the Legendre identity at `t` when `t` lies strictly
/// between `t_min` and `t_max`.
pub fn exponents_suite(p: SleParams) -> Result<Vec<CheckRow>> {
    let k = p.kappa;
    let th = p.thresholds();
    let mut rows = Vec::new();

    let at_tip = Exponents::new(SleParams::new(k, th.t_tip)?)?;
    let tip_gap = (2.0 * at_tip.gamma + 1.0).abs();
    rows.push(CheckRow::new("tip_continuity", p, format!("t={}", th.t_tip), tip_gap, tip_gap < CONTINUITY_TOL));

    let star = SleParams::new(k, th.t_star)?;
    let linear = th.t_star - (4.0 + k).powi(2) / (16.0 * k);
    let star_gap = (beta_tilde(star)? - linear).abs();
    rows.push(CheckRow::new("star_continuity", p, format!("t={}", th.t_star), star_gap, star_gap < CONTINUITY_TOL));

    let e = 1e-5;
    let slope =
        (beta_tilde(SleParams::new(k, th.t_star + e)?)? - beta_tilde(SleParams::new(k, th.t_star - e)?)?) / (2.0 * e);
    rows.push(CheckRow::new("star_slope", p, format!("t={}", th.t_star), slope, (slope - 1.0).abs() < SLOPE_TOL));

    let (t_min, t_max) = t_extremes(k);
    if p.t > t_min && p.t < t_max {
        let sup = legendre_check(k, p.t)?;
        let expected = beta_tilde(p)? - p.t + 1.0;
        let err = (sup - expected).abs();
        rows.push(CheckRow::new("legendre", p, format!("t={}", p.t), sup, err < LEGENDRE_TOL));
    }
    Ok(rows)
}
