//! Driving processes sampled on an absolute dyadic time grid.
//!
//! Time is measured in integer ticks of `2^-TICK_BITS`. The Brownian path is
//! pinned at integer times by unit-variance increments and refined level by
//! level with Lévy-bridge midpoints, so its value at a dyadic time does not
//! depend on the step size used to reach it.

use crate::rng::{symmetric_stable, NoiseKey};

pub const TICK_BITS: u32 = 40;
pub const TICKS_PER_UNIT: u64 = 1 << TICK_BITS;

/// Tag of the stable-jump noise inside a [`NoiseKey`].
const STABLE_TAG_OFFSET: u32 = 0x100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriverSpec {
    /// `ξ = exp(i√κ B)`.
    BrownianCircle { kappa: f64 },
    /// `ξ = exp(i·scale·L)` with `L` a standard symmetric `index`-stable process.
    SymmetricStable { index: f64, scale: f64 },
    /// `ξ ≡ exp(i·angle)`.
    Deterministic { angle: f64 },
}

impl DriverSpec {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = match *self {
            DriverSpec::BrownianCircle { kappa } => kappa > 0.0 && kappa.is_finite(),
            DriverSpec::SymmetricStable { index, scale } => index > 0.0 && index < 2.0 && scale > 0.0,
            DriverSpec::Deterministic { angle } => angle.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(crate::Error::Domain(format!("invalid driver {self:?}")))
        }
    }

    pub fn is_random(&self) -> bool {
        !matches!(self, DriverSpec::Deterministic { .. })
    }
}

/// Level `m` with `2^-m ≤ dt`, the largest such power of two.
pub fn dyadic_level(dt: f64) -> u32 {
    let m = (-dt.log2()).ceil().max(0.0) as u32;
    m.min(TICK_BITS)
}

/// One realization of the driving angle `ξ(s)` on `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct DrivingPath {
    spec: DriverSpec,
    key: NoiseKey,
    sign: f64,
    base_level: u32,
    /// Angle at `k·2^-base_level`.
    base: Vec<f64>,
    horizon_ticks: u64,
}

impl DrivingPath {
    /// `base_level` fixes the grid on which the path is tabulated; finer
    /// times are filled in on demand. With `mirrored` the angle is negated.
    pub fn new(spec: DriverSpec, key: NoiseKey, base_level: u32, horizon: f64, mirrored: bool) -> Self {
        let base_level = base_level.min(TICK_BITS);
        let units = horizon.ceil().max(1.0) as u64;
        let sign = if mirrored { -1.0 } else { 1.0 };
        let base = match spec {
            DriverSpec::BrownianCircle { kappa } => brownian_base(key, base_level, units, kappa.sqrt()),
            DriverSpec::SymmetricStable { index, scale } => {
                let n = units << base_level;
                let jump_scale = scale * (-(base_level as f64) / index).exp2();
                let stable_key = key.with_tag(key.tag + STABLE_TAG_OFFSET);
                let mut out = Vec::with_capacity(n as usize + 1);
                let mut acc = 0.0;
                out.push(0.0);
                for j in 0..n {
                    let (u, v) = stable_key.uniforms(base_level, j);
                    acc += jump_scale * symmetric_stable(index, u, v);
                    out.push(acc);
                }
                out
            }
            DriverSpec::Deterministic { angle } => vec![angle; ((units << base_level) + 1) as usize],
        };
        let base = base.into_iter().map(|v| v * sign).collect();
        Self { spec, key, sign, base_level, base, horizon_ticks: units * TICKS_PER_UNIT }
    }

    pub fn spec(&self) -> DriverSpec {
        self.spec
    }

    pub fn base_level(&self) -> u32 {
        self.base_level
    }

    pub fn horizon_ticks(&self) -> u64 {
        self.horizon_ticks
    }

    /// Driving angle at `ticks`; `ticks ≤ horizon_ticks`.
    pub fn angle_at(&self, ticks: u64) -> f64 {
        debug_assert!(ticks <= self.horizon_ticks);
        let shift = TICK_BITS - self.base_level;
        let k = (ticks >> shift) as usize;
        let rem = ticks & ((1u64 << shift) - 1);
        if rem == 0 {
            return self.base[k];
        }
        match self.spec {
            DriverSpec::BrownianCircle { kappa } => {
                self.bridge(ticks, (k as u64) << shift, self.base[k], self.base[k + 1], kappa.sqrt())
            }
            // Jumps sit on the base grid.
            _ => self.base[k],
        }
    }

    /// Cursor for reading the path at increasing times.
    pub fn cursor(&self) -> PathCursor<'_> {
        PathCursor { path: self, stack: Vec::with_capacity(48) }
    }

    /// Brownian value at `ticks` strictly inside a base cell with known ends.
    fn bridge(&self, ticks: u64, mut lo: u64, mut v_lo: f64, mut v_hi: f64, speed: f64) -> f64 {
        let mut level = self.base_level;
        loop {
            level += 1;
            let half = 1u64 << (TICK_BITS - level);
            let mid = lo + half;
            // Conditional law of the midpoint: mean of the ends, variance (cell length)/4.
            let sd = speed * ((-(level as f64) - 1.0).exp2()).sqrt();
            let v_mid = 0.5 * (v_lo + v_hi) + self.sign * sd * self.key.normal(level, mid >> (TICK_BITS - level));
            if ticks == mid {
                return v_mid;
            }
            if ticks < mid {
                v_hi = v_mid;
            } else {
                lo = mid;
                v_lo = v_mid;
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct BridgeCell {
    level: u32,
    lo: u64,
    v_lo: f64,
    v_hi: f64,
    v_mid: Option<f64>,
}

impl BridgeCell {
    fn hi(&self) -> u64 {
        self.lo + (1u64 << (TICK_BITS - self.level))
    }
}

/// Reads a [`DrivingPath`] while keeping the chain of bridge cells around the
/// last query, so nearby queries reuse the midpoints already drawn. Values
/// are identical to [`DrivingPath::angle_at`].
#[derive(Debug, Clone)]
pub struct PathCursor<'a> {
    path: &'a DrivingPath,
    stack: Vec<BridgeCell>,
}

impl PathCursor<'_> {
    pub fn angle_at(&mut self, ticks: u64) -> f64 {
        let path = self.path;
        let shift = TICK_BITS - path.base_level;
        let rem = ticks & ((1u64 << shift) - 1);
        let speed = match path.spec {
            DriverSpec::BrownianCircle { kappa } if rem != 0 => kappa.sqrt(),
            _ => return path.angle_at(ticks),
        };
        while let Some(top) = self.stack.last() {
            if top.lo <= ticks && ticks <= top.hi() {
                break;
            }
            self.stack.pop();
        }
        if self.stack.is_empty() {
            let k = (ticks >> shift) as usize;
            self.stack.push(BridgeCell {
                level: path.base_level,
                lo: (k as u64) << shift,
                v_lo: path.base[k],
                v_hi: path.base[k + 1],
                v_mid: None,
            });
        }
        loop {
            let top = self.stack.last_mut().expect("nonempty");
            if ticks == top.lo {
                return top.v_lo;
            }
            if ticks == top.hi() {
                return top.v_hi;
            }
            let level = top.level + 1;
            let mid = top.lo + (1u64 << (TICK_BITS - level));
            let v_mid = *top.v_mid.get_or_insert_with(|| {
                let sd = speed * ((-(level as f64) - 1.0).exp2()).sqrt();
                0.5 * (top.v_lo + top.v_hi) + path.sign * sd * path.key.normal(level, mid >> (TICK_BITS - level))
            });
            let child = if ticks <= mid {
                BridgeCell { level, lo: top.lo, v_lo: top.v_lo, v_hi: v_mid, v_mid: None }
            } else {
                BridgeCell { level, lo: mid, v_lo: v_mid, v_hi: top.v_hi, v_mid: None }
            };
            self.stack.push(child);
        }
    }
}

/// Brownian path `√κ B` at `k·2^-level`, `k = 0..=units·2^level`.
fn brownian_base(key: NoiseKey, level: u32, units: u64, speed: f64) -> Vec<f64> {
    let mut vals = Vec::with_capacity(units as usize + 1);
    let mut acc = 0.0;
    vals.push(0.0);
    for k in 0..units {
        acc += speed * key.normal(0, k);
        vals.push(acc);
    }
    for l in 1..=level {
        let sd = speed * ((-(l as f64) - 1.0).exp2()).sqrt();
        let mut next = Vec::with_capacity(2 * vals.len() - 1);
        for (j, w) in vals.windows(2).enumerate() {
            next.push(w[0]);
            next.push(0.5 * (w[0] + w[1]) + sd * key.normal(l, 2 * j as u64 + 1));
        }
        next.push(*vals.last().unwrap());
        vals = next;
    }
    vals
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ticks(x: f64) -> u64 {
        (x * TICKS_PER_UNIT as f64) as u64
    }

    #[test]
    fn levels() {
        assert_eq!(dyadic_level(1.0), 0);
        assert_eq!(dyadic_level(0.015625), 6);
        assert_eq!(dyadic_level(0.02), 6);
        assert_eq!(dyadic_level(0.0156), 7);
    }

    #[test]
    fn path_is_independent_of_base_level() {
        let spec = DriverSpec::BrownianCircle { kappa: 6.0 };
        let key = NoiseKey::new(3, 17);
        let coarse = DrivingPath::new(spec, key, 2, 3.0, false);
        let fine = DrivingPath::new(spec, key, 7, 3.0, false);
        for x in [0.0, 0.25, 1.0, 1.5078125, 2.75, 2.9921875] {
            assert_eq!(coarse.angle_at(ticks(x)), fine.angle_at(ticks(x)), "x={x}");
        }
        assert_eq!(coarse.angle_at(0), 0.0);
    }

    #[test]
    fn cursor_matches_direct_reads() {
        let spec = DriverSpec::BrownianCircle { kappa: 6.0 };
        let p = DrivingPath::new(spec, NoiseKey::new(4, 2), 3, 2.0, true);
        let mut cur = p.cursor();
        let mut t = 0u64;
        let mut k = 1u64;
        while t < p.horizon_ticks() {
            assert_eq!(cur.angle_at(t), p.angle_at(t), "t={t}");
            k = k.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            t += 1 + ((k >> 33) % (1 << (12 + (k >> 60))));
        }
        assert_eq!(cur.angle_at(ticks(0.3)), p.angle_at(ticks(0.3)));
    }

    #[test]
    fn mirrored_path_is_negated() {
        let spec = DriverSpec::BrownianCircle { kappa: 2.0 };
        let key = NoiseKey::new(5, 1);
        let p = DrivingPath::new(spec, key, 3, 2.0, false);
        let q = DrivingPath::new(spec, key, 3, 2.0, true);
        for x in [0.5, 1.0 + 2f64.powi(-20), 1.875] {
            assert_eq!(p.angle_at(ticks(x)), -q.angle_at(ticks(x)));
        }
    }

    #[test]
    fn brownian_increment_variance() {
        let spec = DriverSpec::BrownianCircle { kappa: 6.0 };
        let h = ticks(2f64.powi(-9));
        let t0 = ticks(0.5);
        let n = 20_000;
        let mut s2 = 0.0;
        for i in 0..n {
            let p = DrivingPath::new(spec, NoiseKey::new(9, i), 4, 1.0, false);
            let d = p.angle_at(t0 + h) - p.angle_at(t0);
            s2 += d * d;
        }
        let var = s2 / n as f64 / (6.0 * 2f64.powi(-9));
        assert!((var - 1.0).abs() < 0.04, "{var}");
    }

    #[test]
    fn stable_and_deterministic_paths() {
        let p = DrivingPath::new(DriverSpec::Deterministic { angle: 0.3 }, NoiseKey::new(0, 0), 4, 2.0, false);
        assert_eq!(p.angle_at(ticks(1.3)), 0.3);
        let s = DrivingPath::new(DriverSpec::SymmetricStable { index: 1.5, scale: 1.0 }, NoiseKey::new(0, 0), 4, 2.0, false);
        // Constant between grid points.
        assert_eq!(s.angle_at(ticks(0.25)), s.angle_at(ticks(0.25 + 2f64.powi(-6))));
        assert_ne!(s.angle_at(ticks(0.25)), s.angle_at(ticks(0.3125)));
    }
}
