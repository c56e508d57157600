//! Bounded positive solution `g₃` of the boundary ODE
//!
//! ```text
//! γ(2+κ) g + (8 - 2x + κ(x-2) + 2γκ(x-4)) g′ + κ(x-4) x g″ = 0,   x ∈ [0, 4],
//! ```
//!
//! written in the variable `x = 2 - 2cos θ`. Its hypergeometric solutions are
//! `g₁(x) = ₂F₁(a, b; 1/2+a+b; x/4)` and
//! `g₂(x) = x^{1/2-a-b} ₂F₁(1/2-a, 1/2-b; 3/2-a-b; x/4)`; the combination
//! `g₃ = g₁ - C g₂` kills the `√(4-x)` term at `x = 4`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::{gamma_ratio, log_gamma};
use super::hypergeometric::hyp2f1_with_derivatives;
use crate::error::{Error, Result};
use crate::exponents::{gamma_exponent, SleParams};

/// Largest imaginary residue tolerated in quantities that are real analytically.
pub const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypParams {
    pub a: Complex64,
    pub b: Complex64,
    /// `1/2 + a + b`, third parameter of `g₁`.
    pub c1: Complex64,
    /// `3/2 - a - b`, third parameter of `g₂`.
    pub c2: Complex64,
    pub kappa: f64,
    pub t: f64,
    pub gamma: f64,
}

impl HypParams {
    pub fn new(p: SleParams) -> Result<Self> {
        let gamma = gamma_exponent(p)?;
        let k = p.kappa;
        let root = Complex64::new(1.0 - 2.0 * p.t * k, 0.0).sqrt() / k;
        let mid = gamma - 1.0 / k;
        let a = mid - root;
        let b = mid + root;
        // a + b is real; drop its roundoff so c1, c2 are exactly real.
        let sum = a.re + b.re;
        Ok(Self {
            a,
            b,
            c1: Complex64::new(0.5 + sum, 0.0),
            c2: Complex64::new(1.5 - sum, 0.0),
            kappa: k,
            t: p.t,
            gamma,
        })
    }

    /// `1/2 - a - b = (4 + κ - 4γκ)/(2κ)`, the exponent of `x` in `g₂`.
    pub fn g2_exponent(&self) -> f64 {
        (4.0 + self.kappa - 4.0 * self.gamma * self.kappa) / (2.0 * self.kappa)
    }
}

/// The three boundary solutions for one `(κ, t)`. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypSolution {
    pub params: HypParams,
    /// Mixing constant `C` (real).
    pub c_mix: f64,
}

/// `3(4+κ)²/(32κ)`.
pub fn boundary_condition_limit(kappa: f64) -> f64 {
    3.0 * (4.0 + kappa).powi(2) / (32.0 * kappa)
}

/// Smallest `t` at which `1/2 - b ≥ 0`: `(1 - s²)/(2κ)` with `s = (κ² + 8κ + 8)/8`.
///
/// Below it `Γ(1/2-a)Γ(1/2-b) < 0`, so `g₃(4) < 0` and `g₃` is not positive.
pub fn positivity_threshold(kappa: f64) -> f64 {
    let s = (kappa * kappa + 8.0 * kappa + 8.0) / 8.0;
    (1.0 - s * s) / (2.0 * kappa)
}

/// `C = Γ(1/2+a+b)Γ(1/2-a)Γ(1/2-b) / (2^{1-2a-2b} Γ(a)Γ(b)Γ(3/2-a-b))`, complex.
pub fn mixing_constant(hp: &HypParams) -> Result<Complex64> {
    let half = Complex64::new(0.5, 0.0);
    let ratio = gamma_ratio(&[hp.c1, half - hp.a, half - hp.b], &[hp.a, hp.b, hp.c2])?;
    let sum = hp.a.re + hp.b.re;
    Ok(ratio * 2f64.powf(-(1.0 - 2.0 * sum)))
}

pub fn boundary_solutions(p: SleParams) -> Result<HypSolution> {
    let limit = boundary_condition_limit(p.kappa);
    if p.t > limit {
        return Err(Error::ConditionViolated { t: p.t, limit });
    }
    let params = HypParams::new(p)?;
    // At t = 0 (b = 0) the bounded solution is g ≡ g₁ ≡ 1; the formula for C
    // can be 0/0 there (κ = 4).
    if params.b == Complex64::new(0.0, 0.0) {
        return Ok(HypSolution { params, c_mix: 0.0 });
    }
    let c = mixing_constant(&params)?;
    if c.im.abs() > IMAG_TOL * c.re.abs().max(1.0) {
        return Err(Error::Domain(format!("mixing constant {c} is not real")));
    }
    Ok(HypSolution { params, c_mix: c.re })
}

/// `π^{-3/2} Γ(1/2+a+b) cos(π(a+b)) Γ(1/2-a) Γ(1/2-b)`.
pub fn g3_at_4_closed_form(p: SleParams) -> Result<f64> {
    let limit = boundary_condition_limit(p.kappa);
    if p.t > limit {
        return Err(Error::ConditionViolated { t: p.t, limit });
    }
    let hp = HypParams::new(p)?;
    let half = Complex64::new(0.5, 0.0);
    let logs = log_gamma(hp.c1)? + log_gamma(half - hp.a)? + log_gamma(half - hp.b)?;
    let sum = hp.a.re + hp.b.re;
    let v = logs.exp() * (PI * sum).cos() * PI.powf(-1.5);
    if v.im.abs() > IMAG_TOL * v.re.abs().max(1.0) {
        return Err(Error::Domain(format!("g3(4) = {v} is not real")));
    }
    Ok(v.re)
}

impl HypSolution {
    pub fn new(p: SleParams) -> Result<Self> {
        boundary_solutions(p)
    }

    fn check_x(x: f64) -> Result<()> {
        if !(0.0..4.0).contains(&x) {
            return Err(Error::Domain(format!("boundary solutions need 0 <= x < 4, got {x}")));
        }
        Ok(())
    }

    /// `[g₁, g₁′, g₁″]` at `x`, complex.
    pub fn g1_complex(&self, x: f64) -> Result<[Complex64; 3]> {
        Self::check_x(x)?;
        let hp = &self.params;
        let [f0, f1, f2] = hyp2f1_with_derivatives(hp.a, hp.b, hp.c1, x / 4.0)?;
        Ok([f0, f1 / 4.0, f2 / 16.0])
    }

    /// `[g₂, g₂′, g₂″]` at `x > 0`, complex.
    pub fn g2_complex(&self, x: f64) -> Result<[Complex64; 3]> {
        Self::check_x(x)?;
        let hp = &self.params;
        let p = hp.g2_exponent();
        if x == 0.0 {
            if p > 0.0 {
                return Err(Error::Domain("g2 derivatives are singular at x = 0".into()));
            }
            return Err(Error::Domain(format!("g2 is unbounded at x = 0 (exponent {p})")));
        }
        let half = Complex64::new(0.5, 0.0);
        let [h0, h1, h2] = hyp2f1_with_derivatives(half - hp.a, half - hp.b, hp.c2, x / 4.0)?;
        let (h1, h2) = (h1 / 4.0, h2 / 16.0);
        let xp = x.powf(p);
        let v0 = h0 * xp;
        let v1 = (h0 * (p / x) + h1) * xp;
        let v2 = (h0 * (p * (p - 1.0) / (x * x)) + h1 * (2.0 * p / x) + h2) * xp;
        Ok([v0, v1, v2])
    }

    /// `[g₃, g₃′, g₃″]` at `x ∈ (0, 4)`, complex.
    pub fn g3_complex(&self, x: f64) -> Result<[Complex64; 3]> {
        let g1 = self.g1_complex(x)?;
        if self.c_mix == 0.0 {
            return Ok(g1);
        }
        let g2 = self.g2_complex(x)?;
        Ok([g1[0] - self.c_mix * g2[0], g1[1] - self.c_mix * g2[1], g1[2] - self.c_mix * g2[2]])
    }

    /// `g₃(x)` for `x ∈ [0, 4)`.
    pub fn g3(&self, x: f64) -> Result<f64> {
        if x == 0.0 && self.params.g2_exponent() > 0.0 {
            // g₂(0) = 0 and g₁(0) = 1.
            return Ok(1.0);
        }
        Ok(self.g3_complex(x)?[0].re)
    }

    /// `g₃(4)` from values at `4 - h`, `4 - 2h`, `4 - 4h`, cancelling the
    /// `h` and `h²` terms of the expansion at 4.
    pub fn g3_limit_at_4(&self, h: f64) -> Result<f64> {
        let g = |k: f64| self.g3(4.0 - k * h);
        Ok((8.0 * g(1.0)? - 6.0 * g(2.0)? + g(4.0)?) / 3.0)
    }

    /// `[g₃, g₃′, g₃″]` at `x ∈ (0, 4)`, real parts.
    pub fn g3_with_derivatives(&self, x: f64) -> Result<[f64; 3]> {
        let [v0, v1, v2] = self.g3_complex(x)?;
        Ok([v0.re, v1.re, v2.re])
    }
}

/// A twice-differentiable function of `x` tested against the boundary ODE.
pub trait BoundaryCandidate {
    /// `[g, g′, g″]` at `x`.
    fn eval(&self, x: f64) -> Result<[f64; 3]>;
}

impl BoundaryCandidate for HypSolution {
    fn eval(&self, x: f64) -> Result<[f64; 3]> {
        self.g3_with_derivatives(x)
    }
}

impl<G: BoundaryCandidate + ?Sized> BoundaryCandidate for &G {
    fn eval(&self, x: f64) -> Result<[f64; 3]> {
        (**self).eval(x)
    }
}

/// `g(x) ≡ value`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantCandidate(pub f64);

impl BoundaryCandidate for ConstantCandidate {
    fn eval(&self, _x: f64) -> Result<[f64; 3]> {
        Ok([self.0, 0.0, 0.0])
    }
}

/// Left side of the boundary ODE divided by `max(|g(x)|, 1)`.
pub fn ode_residual<G: BoundaryCandidate + ?Sized>(kappa: f64, gamma: f64, g: &G, x: f64) -> Result<f64> {
    let [g0, g1, g2] = g.eval(x)?;
    let lhs = gamma * (2.0 + kappa) * g0
        + (8.0 - 2.0 * x + kappa * (x - 2.0) + 2.0 * gamma * kappa * (x - 4.0)) * g1
        + kappa * (x - 4.0) * x * g2;
    Ok(lhs / g0.abs().max(1.0))
}

/// Normalized ODE residual of `g₃`.
pub fn boundary_ode_residual(sol: &HypSolution, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 4.0) {
        return Err(Error::Domain(format!("residual needs 0 < x < 4, got {x}")));
    }
    ode_residual(sol.params.kappa, sol.params.gamma, sol, x)
}
