//! Independent reference values for the integration tests.
//!
//! The spectrum formulas are re-derived here in double-double arithmetic
//! (about 32 significant digits) without calling into the library.

#![allow(dead_code)]

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn sqrt(self) -> Self {
        assert!(self.hi >= 0.0, "sqrt of negative {self:?}");
        if self.hi == 0.0 {
            return Dd::new(0.0);
        }
        // One Newton step from the f64 root doubles the precision.
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = ((self.hi - p) - e + self.lo) / (2.0 * x);
        let (hi, lo) = quick_two_sum(x, r);
        Dd { hi, lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// `(γ, β)` at `(κ, t)`.
pub fn gamma_beta(kappa: f64, t: f64) -> (Dd, Dd) {
    let k = Dd::new(kappa);
    let t = Dd::new(t);
    let s = Dd::new(4.0) + k;
    let disc = s * s - Dd::new(8.0) * t * k;
    let gamma = (s - disc.sqrt()) / (Dd::new(2.0) * k);
    let beta = t - s * gamma / Dd::new(2.0);
    (gamma, beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleBranch {
    Tip,
    Analytic,
    Linear,
}

/// Whole-plane (`with_tip`) or bulk average spectrum.
pub fn spectrum(kappa: f64, t: f64, with_tip: bool) -> (f64, OracleBranch) {
    let k = Dd::new(kappa);
    let s = Dd::new(4.0) + k;
    let t_tip = Dd::new(-1.0) - Dd::new(3.0) * k / Dd::new(8.0);
    let t_star = Dd::new(3.0) * s * s / (Dd::new(32.0) * k);
    if t >= t_star.to_f64() {
        let v = Dd::new(t) - s * s / (Dd::new(16.0) * k);
        return (v.to_f64(), OracleBranch::Linear);
    }
    let (gamma, beta) = gamma_beta(kappa, t);
    if with_tip && t <= t_tip.to_f64() {
        ((-beta - Dd::new(2.0) * gamma - Dd::new(1.0)).to_f64(), OracleBranch::Tip)
    } else {
        ((-beta).to_f64(), OracleBranch::Analytic)
    }
}

/// `(t_tip, t_star)`.
pub fn thresholds(kappa: f64) -> (f64, f64) {
    let k = Dd::new(kappa);
    let s = Dd::new(4.0) + k;
    (
        (Dd::new(-1.0) - Dd::new(3.0) * k / Dd::new(8.0)).to_f64(),
        (Dd::new(3.0) * s * s / (Dd::new(32.0) * k)).to_f64(),
    )
}

/// SplitMix64 stream for reproducible test inputs.
pub struct Stream(u64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * ((self.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
    }
}
