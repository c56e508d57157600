//! Gauss hypergeometric function `₂F₁(a, b; c; z)` with complex parameters on
//! the real segment `0 ≤ z < 1`.
//!
//! The power series is summed directly for `z ≤ 1/2`. Above that it is still
//! used when its terms barely cancel (condition number at most
//! [`DIRECT_MAX_CONDITION`]), which holds for instance when `b = conj(a)` and
//! `c > 0`; otherwise the `z → 1 - z` connection formula is used, so both
//! inner series run with an argument below `1/2`.

use num_complex::Complex64;

use super::gamma::{gamma_ratio, is_gamma_pole};
use crate::error::{Error, Result};

pub const MAX_TERMS: usize = 1_000_000;
const SWITCH: f64 = 0.5;
const EPS: f64 = 1e-17;
/// Largest `Σ|term| / |sum|` accepted from the direct series above `z = 1/2`.
pub const DIRECT_MAX_CONDITION: f64 = 4.0;
/// Term budget for the direct series above `z = 1/2`.
const DIRECT_MAX_TERMS: usize = 200_000;

fn is_nonpositive_integer(z: Complex64) -> bool {
    is_gamma_pole(z)
}

fn near_integer(z: Complex64) -> bool {
    z.im.abs() < 1e-12 && (z.re - z.re.round()).abs() < 1e-9
}

/// Plain Gauss series.
pub fn hyp2f1_series(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Result<Complex64> {
    Ok(series_with_condition(a, b, c, z, MAX_TERMS)?.0)
}

/// Gauss series and its summation condition number `Σ|term| / |sum|`.
fn series_with_condition(a: Complex64, b: Complex64, c: Complex64, z: f64, max_terms: usize) -> Result<(Complex64, f64)> {
    let one = Complex64::new(1.0, 0.0);
    let mut sum = one;
    let mut term = one;
    let mut abs_sum = 1.0;
    if z == 0.0 {
        return Ok((sum, 1.0));
    }
    for n in 0..max_terms {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        term *= ratio;
        sum += term;
        abs_sum += term.norm();
        if term.norm() == 0.0 {
            return Ok((sum, abs_sum / sum.norm()));
        }
        // The tail is geometric once |ratio| < 1; stop when it is negligible.
        let q = ratio.norm();
        if q < 1.0 && term.norm() * q / (1.0 - q) <= EPS * sum.norm() {
            return Ok((sum, abs_sum / sum.norm()));
        }
    }
    Err(Error::NonConvergence { terms: max_terms })
}

/// `₂F₁(a, b; c; z)` for real `z ∈ [0, 1)`.
pub fn hyp2f1(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::Domain(format!("hyp2f1 needs 0 <= z < 1, got {z}")));
    }
    let zero = Complex64::new(0.0, 0.0);
    // With a = 0 or b = 0 only the constant term survives, whatever c is.
    if z == 0.0 || a == zero || b == zero {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::ParameterPole(format!("{c}")));
    }
    // Terminating series.
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) || z <= SWITCH {
        return hyp2f1_series(a, b, c, z);
    }
    let s = c - a - b;
    if near_integer(s) {
        // The connection coefficients are singular; the direct series still
        // converges for z < 1, just slowly.
        return hyp2f1_series(a, b, c, z);
    }
    if let Ok((sum, cond)) = series_with_condition(a, b, c, z, DIRECT_MAX_TERMS) {
        if cond <= DIRECT_MAX_CONDITION {
            return Ok(sum);
        }
    }
    let w = 1.0 - z;
    let one = Complex64::new(1.0, 0.0);
    let first = gamma_ratio(&[c, s], &[c - a, c - b])?;
    let second = gamma_ratio(&[c, -s], &[a, b])?;
    let mut out = Complex64::new(0.0, 0.0);
    if first != Complex64::new(0.0, 0.0) {
        out += first * hyp2f1_series(a, b, one - s, w)?;
    }
    if second != Complex64::new(0.0, 0.0) {
        out += second * (s * w.ln()).exp() * hyp2f1_series(c - a, c - b, one + s, w)?;
    }
    Ok(out)
}

/// Value and first two `z`-derivatives of `₂F₁(a, b; c; z)`, from
/// `d/dz ₂F₁(a,b;c;z) = (ab/c) ₂F₁(a+1,b+1;c+1;z)`.
pub fn hyp2f1_with_derivatives(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    z: f64,
) -> Result<[Complex64; 3]> {
    let f0 = hyp2f1(a, b, c, z)?;
    let zero = Complex64::new(0.0, 0.0);
    if a == zero || b == zero {
        return Ok([f0, zero, zero]);
    }
    let k1 = a * b / c;
    let f1 = if k1 == Complex64::new(0.0, 0.0) { k1 } else { k1 * hyp2f1(a + 1.0, b + 1.0, c + 1.0, z)? };
    let k2 = k1 * (a + 1.0) * (b + 1.0) / (c + 1.0);
    let f2 = if k2 == Complex64::new(0.0, 0.0) { k2 } else { k2 * hyp2f1(a + 2.0, b + 2.0, c + 2.0, z)? };
    Ok([f0, f1, f2])
}
