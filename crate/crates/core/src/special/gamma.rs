//! Complex log-Gamma.
//!
//! Right half-plane (`Re z ≥ 1/2`): Lanczos approximation with `g = 7`, nine
//! coefficients (P. Godfrey's double-precision set, as tabulated in Numerical
//! Recipes 3rd ed. §6.1 and used by GSL). Left half-plane: reflection
//! `log Γ(z) = log π - log sin(πz) - log Γ(1-z)` with `log sin` written so it
//! is analytic in the upper half-plane, which keeps the result on the
//! principal branch (branch cut along the negative real axis, values on the
//! cut taken as the limit from above).

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `0.5·ln(2π)`
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

pub fn is_gamma_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Principal branch of `log Γ(z)`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("log_gamma of non-finite {z}")));
    }
    if is_gamma_pole(z) {
        return Err(Error::GammaPole(format!("{z}")));
    }
    if z.im < 0.0 {
        return Ok(log_gamma_upper(z.conj()).conj());
    }
    Ok(log_gamma_upper(z))
}

/// `Im z ≥ 0`, not a pole.
fn log_gamma_upper(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        return lanczos(z);
    }
    let one = Complex64::new(1.0, 0.0);
    // 1 - z lies in the closed lower half-plane with real part > 1/2.
    let rest = lanczos(one - z);
    // Analytic on {Im z > 0, Re z < 1/2} and equal to the principal branch
    // where the two half-plane formulas overlap.
    Complex64::new(PI.ln(), 0.0) - log_sin_pi_upper(z) - rest
}

/// `log sin(πz)` for `Im z ≥ 0`: `-iπz + ln(1 - e^{2πiz}) - ln 2 + iπ/2`.
fn log_sin_pi_upper(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let u = (2.0 * PI * i * z).exp();
    -i * PI * z + (Complex64::new(1.0, 0.0) - u).ln() - LN_2 + i * (PI / 2.0)
}

fn lanczos(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (k, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (zm1 + k as f64);
    }
    let w = zm1 + LANCZOS_G + 0.5;
    HALF_LN_2PI + (zm1 + 0.5) * w.ln() - w + acc.ln()
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(log_gamma(z)?.exp())
}

/// `1/Γ(z)`, zero at the poles.
pub fn recip_gamma(z: Complex64) -> Result<Complex64> {
    if is_gamma_pole(z) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok((-log_gamma(z)?).exp())
}

/// `Π Γ(num) / Π Γ(den)`, summed in log space.
///
/// A pole in the denominator makes the ratio exactly zero; a pole in the
/// numerator is an error.
pub fn gamma_ratio(num: &[Complex64], den: &[Complex64]) -> Result<Complex64> {
    if let Some(z) = num.iter().find(|z| is_gamma_pole(**z)) {
        return Err(Error::GammaPole(format!("{z}")));
    }
    if den.iter().any(|z| is_gamma_pole(*z)) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for z in num {
        acc += log_gamma(*z)?;
    }
    for z in den {
        acc -= log_gamma(*z)?;
    }
    Ok(acc.exp())
}
