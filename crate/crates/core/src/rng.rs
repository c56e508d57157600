//! Counter-based random numbers.
//!
//! Philox4x32-10 (Salmon, Moraes, Dror, Shaw: "Parallel random numbers: as
//! easy as 1, 2, 3", SC11). Every variate is a pure function of
//! `(seed, tag, level, stream, index)`, so results do not depend on the order
//! in which paths are simulated or on the thread count.

use std::f64::consts::PI;

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = (a as u64) * (b as u64);
    ((p >> 32) as u32, p as u32)
}

/// Ten-round Philox bijection of a 128-bit counter under a 64-bit key.
pub fn philox4x32_10(ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = ctr;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(W0);
            k[1] = k[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, c[0]);
        let (hi1, lo1) = mulhilo(M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// SplitMix64 finalizer, used only to derive Philox keys.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Identifies one independent noise source: a master seed, a stream (the
/// path index) and a tag separating unrelated uses within a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseKey {
    pub seed: u64,
    pub stream: u64,
    pub tag: u32,
}

impl NoiseKey {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream, tag: 0 }
    }

    pub fn with_tag(self, tag: u32) -> Self {
        Self { tag, ..self }
    }

    fn philox_key(&self, level: u32) -> [u32; 2] {
        let k = splitmix64(self.seed ^ splitmix64(((self.tag as u64) << 32) | level as u64));
        [k as u32, (k >> 32) as u32]
    }

    /// 128 random bits for `(level, index)`.
    pub fn bits(&self, level: u32, index: u64) -> [u32; 4] {
        let ctr = [index as u32, (index >> 32) as u32, self.stream as u32, (self.stream >> 32) as u32];
        philox4x32_10(ctr, self.philox_key(level))
    }

    /// Standard normal for `(level, index)`.
    pub fn normal(&self, level: u32, index: u64) -> f64 {
        let [a, b, c, d] = self.bits(level, index);
        box_muller(open_unit(a, b), open_unit(c, d))
    }

    /// Two independent uniforms on `(0, 1]` for `(level, index)`.
    pub fn uniforms(&self, level: u32, index: u64) -> (f64, f64) {
        let [a, b, c, d] = self.bits(level, index);
        (open_unit(a, b), open_unit(c, d))
    }
}

/// 53-bit uniform on `(0, 1]`.
#[inline]
pub fn open_unit(hi: u32, lo: u32) -> f64 {
    let m = (((hi as u64) << 32) | lo as u64) >> 11;
    (m + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Box–Muller, cosine branch: `√(-2 ln u₁) cos(2π u₂)`.
#[inline]
pub fn box_muller(u1: f64, u2: f64) -> f64 {
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Standard symmetric `α`-stable variate (characteristic function
/// `exp(-|k|^α)`) by the Chambers–Mallows–Stuck construction from a uniform
/// angle and a unit exponential.
pub fn symmetric_stable(alpha: f64, u_angle: f64, u_exp: f64) -> f64 {
    let v = PI * (u_angle - 0.5);
    let w = -u_exp.ln();
    if (alpha - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let s = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    s * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}
