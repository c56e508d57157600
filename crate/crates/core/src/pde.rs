//! Residuals of the stationary radial equation
//!
//! ```text
//! Λ F = t(A - 1) F + b_r F_r - b_θ F_θ + (κ/2) F_θθ
//! ```
//!
//! (`A`, `b_r`, `b_θ` as in the reverse flow), of its chordal tangent
//! equation, and of the comparison functions `f·(-log(r-1))^δ` built on the
//! hypergeometric boundary solution.
//!
//! Fields are handed to the operators as jets divided by a positive
//! normalizer, so the singular prefactor `(r-1)^β |z-1|^{2γ}` never has to be
//! formed; all derivatives are analytic.

use crate::error::{Error, Result};
use crate::exponents::{Exponents, SleParams};
use crate::special::boundary::{boundary_solutions, BoundaryCandidate};

/// `F, F_r, F_θ, F_θθ`, each divided by the same positive normalizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub f: f64,
    pub f_r: f64,
    pub f_theta: f64,
    pub f_theta2: f64,
}

/// `F, F_x, F_y, F_xx`, each divided by the same positive normalizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordalJet {
    pub f: f64,
    pub f_x: f64,
    pub f_y: f64,
    pub f_xx: f64,
}

/// A field with closed-form derivatives, addressed by `h = r - 1` and `θ`.
pub trait RadialField {
    fn jet(&self, h: f64, theta: f64) -> Result<Jet>;
}

/// `F ≡ c`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField(pub f64);

impl RadialField for ConstantField {
    fn jet(&self, _h: f64, _theta: f64) -> Result<Jet> {
        Ok(Jet { f: self.0, f_r: 0.0, f_theta: 0.0, f_theta2: 0.0 })
    }
}

/// `(r-1)^β w^γ g(w) (-log(r-1))^δ` with `w = r² - 2r cos θ + 1`; jets are
/// divided by `(r-1)^β w^γ (-log(r-1))^δ`.
#[derive(Debug, Clone, Copy)]
pub struct Ansatz<G> {
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub g: G,
}

/// `w = |z - 1|²` and its derivatives, from `h` and `s₂ = 1 - cos θ`.
#[derive(Debug, Clone, Copy)]
struct Geometry {
    r: f64,
    w: f64,
    w_r: f64,
    w_theta: f64,
    w_theta2: f64,
    sin_t: f64,
}

fn geometry(h: f64, theta: f64) -> Geometry {
    let r = 1.0 + h;
    let sh = (0.5 * theta).sin();
    let s2 = 2.0 * sh * sh;
    let (sin_t, cos_t) = theta.sin_cos();
    Geometry {
        r,
        w: h * h + 2.0 * r * s2,
        w_r: 2.0 * (h + s2),
        w_theta: 2.0 * r * sin_t,
        w_theta2: 2.0 * r * cos_t,
        sin_t,
    }
}

impl<G: BoundaryCandidate> RadialField for Ansatz<G> {
    fn jet(&self, h: f64, theta: f64) -> Result<Jet> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::Domain(format!("ansatz needs 0 < r - 1 < 1, got {h}")));
        }
        let geo = geometry(h, theta);
        if !(geo.w < 4.0) {
            return Err(Error::Domain(format!("|z - 1|² = {} outside [0, 4)", geo.w)));
        }
        let [g0, g1, g2] = self.g.eval(geo.w)?;
        let ell = -h.ln();
        // Logarithmic derivatives of the normalizer.
        let l_r = self.beta / h + self.gamma * geo.w_r / geo.w - self.delta / (h * ell);
        let l_t = self.gamma * geo.w_theta / geo.w;
        let l_tt = self.gamma * (geo.w_theta2 / geo.w - (geo.w_theta / geo.w).powi(2));
        Ok(Jet {
            f: g0,
            f_r: l_r * g0 + g1 * geo.w_r,
            f_theta: l_t * g0 + g1 * geo.w_theta,
            f_theta2: (l_tt + l_t * l_t) * g0 + 2.0 * l_t * g1 * geo.w_theta + g2 * geo.w_theta.powi(2) + g1 * geo.w_theta2,
        })
    }
}

/// The chordal solution `y^β (x² + y²)^γ` transplanted to `y = r - 1`,
/// `x = θ`; jets are divided by the field itself.
#[derive(Debug, Clone, Copy)]
pub struct ChordalPower {
    pub beta: f64,
    pub gamma: f64,
}

impl ChordalPower {
    pub fn chordal_jet(&self, x: f64, y: f64) -> ChordalJet {
        let rho = x * x + y * y;
        let lx = 2.0 * self.gamma * x / rho;
        let lxx = 2.0 * self.gamma / rho - 4.0 * self.gamma * x * x / (rho * rho);
        ChordalJet { f: 1.0, f_x: lx, f_y: self.beta / y + 2.0 * self.gamma * y / rho, f_xx: lxx + lx * lx }
    }
}

impl RadialField for ChordalPower {
    fn jet(&self, h: f64, theta: f64) -> Result<Jet> {
        if !(h > 0.0) {
            return Err(Error::Domain(format!("need r - 1 > 0, got {h}")));
        }
        let j = self.chordal_jet(theta, h);
        Ok(Jet { f: j.f, f_r: j.f_y, f_theta: j.f_x, f_theta2: j.f_xx })
    }
}

/// `(A - 1, b_r, b_θ)` at `r = 1 + h`.
pub fn radial_coefficients(h: f64, theta: f64) -> (f64, f64, f64) {
    let geo = geometry(h, theta);
    let r = geo.r;
    let s2 = 2.0 * (0.5 * theta).sin().powi(2);
    // Numerator of A expanded in h and s₂ = 1 - cos θ.
    let num = h * h * (r * r - 2.0 * r - 1.0) + 4.0 * r * r * r * s2;
    let a = num / (geo.w * geo.w);
    (a - 1.0, r * h * (r + 1.0) / geo.w, 2.0 * r * geo.sin_t / geo.w)
}

/// The four terms of `ΛF` in order: zeroth order, `r`, `θ`, `θθ`.
pub fn radial_terms(p: SleParams, h: f64, theta: f64, jet: &Jet) -> [f64; 4] {
    let (a1, br, bt) = radial_coefficients(h, theta);
    [p.t * a1 * jet.f, br * jet.f_r, -bt * jet.f_theta, 0.5 * p.kappa * jet.f_theta2]
}

/// `ΛF` divided by the jet's normalizer.
pub fn radial_operator_jet(p: SleParams, h: f64, theta: f64, jet: &Jet) -> f64 {
    radial_terms(p, h, theta, jet).iter().sum()
}

/// `ΛF` at `(r, θ)`, divided by the field's normalizer.
pub fn radial_operator<F: RadialField + ?Sized>(field: &F, r: f64, theta: f64, p: SleParams) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("radial operator needs r > 1, got {r}")));
    }
    radial_operator_at(field, r - 1.0, theta, p)
}

/// As [`radial_operator`] with `h = r - 1` given exactly.
pub fn radial_operator_at<F: RadialField + ?Sized>(field: &F, h: f64, theta: f64, p: SleParams) -> Result<f64> {
    Ok(radial_operator_jet(p, h, theta, &field.jet(h, theta)?))
}

/// The four terms of the chordal operator, same order as [`radial_terms`].
pub fn chordal_terms(p: SleParams, x: f64, y: f64, jet: &ChordalJet) -> [f64; 4] {
    let rho = x * x + y * y;
    [
        2.0 * p.t * (x * x - y * y) / (rho * rho) * jet.f,
        2.0 * y / rho * jet.f_y,
        -2.0 * x / rho * jet.f_x,
        0.5 * p.kappa * jet.f_xx,
    ]
}

/// Chordal operator on `y^β (x² + y²)^γ` divided by the field, with explicit
/// exponents (for perturbed controls).
pub fn chordal_residual_with(p: SleParams, beta: f64, gamma: f64, x: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("chordal operator needs y > 0, got {y}")));
    }
    let jet = ChordalPower { beta, gamma }.chordal_jet(x, y);
    Ok(chordal_terms(p, x, y, &jet).iter().sum())
}

/// Chordal operator on `y^β (x² + y²)^γ` with the exponents of `p`, divided
/// by the field.
pub fn chordal_operator_residual(p: SleParams, x: f64, y: f64) -> Result<f64> {
    let e = Exponents::new(p)?;
    chordal_residual_with(p, e.beta, e.gamma, x, y)
}

/// One evaluation of an operator on a candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSample {
    /// `(r, θ)` or `(x, y)`.
    pub location: (f64, f64),
    pub residual: f64,
    /// Leading-order factor divided out of `residual`.
    pub normalizer: f64,
    pub ratio: f64,
}

/// `Λf / [(r-1)^β w^γ]` for `f = (r-1)^β w^γ g(w)` at `r = 1 + h`, with `g`
/// given.
pub fn ansatz_scaling_with<G: BoundaryCandidate + Copy>(
    p: SleParams,
    g: G,
    theta: f64,
    h_list: &[f64],
) -> Result<Vec<OperatorSample>> {
    let e = Exponents::new(p)?;
    let field = Ansatz { beta: e.beta, gamma: e.gamma, delta: 0.0, g };
    h_list
        .iter()
        .map(|&h| {
            let ratio = radial_operator_at(&field, h, theta, p)?;
            let w = geometry(h, theta).w;
            let normalizer = (e.beta * h.ln() + e.gamma * w.ln()).exp();
            Ok(OperatorSample { location: (1.0 + h, theta), residual: ratio * normalizer, normalizer, ratio })
        })
        .collect()
}

/// [`ansatz_scaling_with`] using the bounded hypergeometric solution `g₃`.
pub fn ansatz_scaling(p: SleParams, theta: f64, h_list: &[f64]) -> Result<Vec<OperatorSample>> {
    let sol = boundary_solutions(p)?;
    ansatz_scaling_with(p, sol, theta, h_list)
}

/// Least-squares slope of `log|ratio|` against `log(r - 1)`.
pub fn ratio_log_slope(samples: &[OperatorSample]) -> f64 {
    let pts: Vec<(f64, f64)> =
        samples.iter().map(|s| ((s.location.0 - 1.0).ln(), s.ratio.abs().max(f64::MIN_POSITIVE).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `2^-lo, …, 2^-hi`.
pub fn dyadic_ladder(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignSample {
    pub h: f64,
    /// `ΛF / F`.
    pub value: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignReport {
    pub delta: f64,
    pub theta: f64,
    /// In the order of the input ladder.
    pub samples: Vec<SignSample>,
    /// Largest ladder value at and below which every sample has the sign
    /// `-sign(δ)`; `None` if even the smallest fails.
    pub h0: Option<f64>,
}

impl SignReport {
    pub fn passed(&self) -> bool {
        self.h0.is_some()
    }
}

/// Sign of `ΛF` for `F = f·(-log(r-1))^δ` along `h_list`.
pub fn subsupersolution_sign(p: SleParams, delta: f64, theta: f64, h_list: &[f64]) -> Result<SignReport> {
    if !(delta != 0.0 && delta.abs() <= 2.0) {
        return Err(Error::Domain(format!("need 0 < |δ| ≤ 2, got {delta}")));
    }
    let e = Exponents::new(p)?;
    let sol = boundary_solutions(p)?;
    let field = Ansatz { beta: e.beta, gamma: e.gamma, delta, g: &sol };
    let expected = -delta.signum();
    let samples = h_list
        .iter()
        .map(|&h| {
            let jet = field.jet(h, theta)?;
            let value = radial_operator_jet(p, h, theta, &jet) / jet.f;
            Ok(SignSample { h, value, ok: value.signum() == expected && value != 0.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<&SignSample> = samples.iter().collect();
    order.sort_by(|a, b| a.h.total_cmp(&b.h));
    let mut h0 = None;
    for s in order {
        if !s.ok {
            break;
        }
        h0 = Some(s.h);
    }
    Ok(SignReport { delta, theta, samples, h0 })
}

/// Term-by-term comparison of the radial and chordal operators on
/// `y^β (x² + y²)^γ` at `(θ, r - 1) = (x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangencySample {
    pub x: f64,
    pub y: f64,
    pub radial: [f64; 4],
    pub chordal: [f64; 4],
    /// `max |radial_i - chordal_i| / max |chordal_i|`.
    pub rel_diff: f64,
}

pub fn tangency_sample(p: SleParams, x: f64, y: f64) -> Result<TangencySample> {
    let e = Exponents::new(p)?;
    let field = ChordalPower { beta: e.beta, gamma: e.gamma };
    let radial = radial_terms(p, y, x, &field.jet(y, x)?);
    let chordal = chordal_terms(p, x, y, &field.chordal_jet(x, y));
    let scale = chordal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = radial.iter().zip(&chordal).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(TangencySample { x, y, radial, chordal, rel_diff: diff / scale })
}
