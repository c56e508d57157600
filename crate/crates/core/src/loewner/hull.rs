//! Snapshot of the reverse flow `∂_s f = f (f + ξ)/(f - ξ)` applied to a
//! circle of radius `1 + ε`, all points sharing one driving path.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{integrate, McConfig, PathState, TICKS_PER_UNIT};
use crate::error::{Error, Result};
use crate::rng::NoiseKey;

/// Trajectories closer than this to the driving point are treated as absorbed.
pub const ABSORB_DIST: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HullCloud {
    /// Launch angles in `(-π, π]`, increasing.
    pub angles: Vec<f64>,
    /// `f_T((1+ε)e^{iθ_k})`; `None` for absorbed points.
    pub points: Vec<Option<Complex64>>,
}

impl HullCloud {
    pub fn absorbed(&self) -> usize {
        self.points.iter().filter(|p| p.is_none()).count()
    }
}

/// Launch angle `k` of `n`: `-π + 2π(k + 1/2)/n`.
pub fn launch_angle(k: usize, n: usize) -> f64 {
    -PI + 2.0 * PI * (k as f64 + 0.5) / n as f64
}

pub fn hull_point_cloud(cfg: &McConfig, time: f64, n_boundary: usize, eps: f64) -> Result<HullCloud> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be positive, got {eps}")));
    }
    if !(time >= 0.0 && time.is_finite()) {
        return Err(Error::Domain(format!("time must be nonnegative, got {time}")));
    }
    if n_boundary == 0 {
        return Err(Error::Domain("need at least one boundary point".into()));
    }
    let cfg = McConfig { s_max: time, r_stop: f64::INFINITY, ..*cfg };
    cfg.driver.validate()?;
    let path = cfg.driving_path(NoiseKey::new(cfg.master_seed, 0), false);
    let horizon = (time * TICKS_PER_UNIT as f64).floor() as u64;
    let xi_end = path.angle_at(horizon);
    let mut angles = Vec::with_capacity(n_boundary);
    let mut points = Vec::with_capacity(n_boundary);
    for k in 0..n_boundary {
        let theta = launch_angle(k, n_boundary);
        angles.push(theta);
        let start = PathState::from_rm1(eps, theta)?;
        let out = integrate(start, &path, cfg.base_level(), cfg.near_factor, f64::INFINITY, horizon);
        let point = match out {
            Ok(o) if o.min_dist2.min(o.state.dist2()) >= ABSORB_DIST * ABSORB_DIST => {
                Some(Complex64::from_polar(o.state.r, o.state.theta + xi_end))
            }
            _ => None,
        };
        points.push(point);
    }
    Ok(HullCloud { angles, points })
}
