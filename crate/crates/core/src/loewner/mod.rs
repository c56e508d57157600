//! Reverse radial Loewner flow in the coordinates `z_s = f_s(z)/ξ_s = r e^{iθ}`:
//!
//! ```text
//! d log|f_s′(z)| = A(r, θ) ds
//! dr             = r(r²-1)/(r² - 2r cos θ + 1) ds
//! dθ             = -2r sin θ/(r² - 2r cos θ + 1) ds - dξ_s
//! ```
//!
//! with `A = (r⁴ + 4r²(1 - r cos θ) - 1)/(r² - 2r cos θ + 1)²`. Steps are
//! dyadic so that every trajectory reads the driving path on the same grid.

pub mod driver;
pub mod hull;

pub use driver::{dyadic_level, DriverSpec, DrivingPath, PathCursor, TICKS_PER_UNIT, TICK_BITS};
pub use hull::{hull_point_cloud, HullCloud};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::NoiseKey;

/// Default bound on the step near the singular point: `h ≤ c·|z - 1|²`.
pub const DEFAULT_NEAR_FACTOR: f64 = 0.025;

/// Terms of the system written with `d = r - 1` and `s₂ = 1 - cos θ` so
/// they keep full relative precision as `r → 1` or `θ → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Coefficients {
    w: f64,
    dlogd: f64,
    dr: f64,
    dtheta: f64,
}

#[inline]
fn coefficients(d: f64, theta: f64) -> Coefficients {
    let r = 1.0 + d;
    let (sin_half, cos_half) = (0.5 * theta).sin_cos();
    let sin_t = 2.0 * sin_half * cos_half;
    let s2 = 2.0 * sin_half * sin_half;
    let w = d * d + 2.0 * r * s2;
    let num = d * d * (r * r - 2.0 * r - 1.0) + 4.0 * r * r * r * s2;
    Coefficients { w, dlogd: num / (w * w), dr: r * d * (r + 1.0) / w, dtheta: -2.0 * r * sin_t / w }
}

/// `(∂ log|f′|, dr/ds, θ drift)` at `(r, θ)`, `r > 1`.
pub fn drift_terms(r: f64, theta: f64) -> (f64, f64, f64) {
    let c = coefficients(r - 1.0, theta);
    (c.dlogd, c.dr, c.dtheta)
}

/// `θ` reduced to `(-π, π]`.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let t = theta - 2.0 * PI * (theta / (2.0 * PI)).round();
    if t <= -PI {
        t + 2.0 * PI
    } else if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// One trajectory of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub s: f64,
    pub r: f64,
    /// `r - 1`, carried separately for precision near the circle.
    pub rm1: f64,
    pub theta: f64,
    pub logd: f64,
}

impl PathState {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r > 1.0) || !r.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!("start point needs r > 1, got r = {r}, θ = {theta}")));
        }
        Ok(Self { s: 0.0, r, rm1: r - 1.0, theta: wrap_angle(theta), logd: 0.0 })
    }

    /// Start at `r = 1 + rm1` without rounding `rm1`.
    pub fn from_rm1(rm1: f64, theta: f64) -> Result<Self> {
        if !(rm1 > 0.0) || !rm1.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!("start point needs r - 1 > 0, got {rm1}")));
        }
        Ok(Self { s: 0.0, r: 1.0 + rm1, rm1, theta: wrap_angle(theta), logd: 0.0 })
    }

    /// `log|f_s′(z)| - s`.
    pub fn compensated(&self) -> f64 {
        self.logd - self.s
    }

    /// `|z_s - 1|²`.
    pub fn dist2(&self) -> f64 {
        coefficients(self.rm1, self.theta).w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub dt: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    pub r_stop: f64,
    pub s_max: f64,
    pub driver: DriverSpec,
    /// `c` in `h ≤ c·|z - 1|²`.
    pub near_factor: f64,
}

impl McConfig {
    pub fn new(kappa: f64) -> Self {
        Self {
            dt: 2f64.powi(-6),
            n_paths: 100_000,
            master_seed: 1,
            r_stop: 50.0,
            s_max: 10.0,
            driver: DriverSpec::BrownianCircle { kappa },
            near_factor: DEFAULT_NEAR_FACTOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 1.0) {
            return Err(Error::Domain(format!("dt must be in (0, 1], got {}", self.dt)));
        }
        if self.n_paths < 1 {
            return Err(Error::Domain("n_paths must be at least 1".into()));
        }
        if !(self.r_stop > 2.0) {
            return Err(Error::Domain(format!("r_stop must exceed 2, got {}", self.r_stop)));
        }
        if !(self.s_max >= 0.0 && self.s_max.is_finite()) {
            return Err(Error::Domain(format!("s_max must be finite and nonnegative, got {}", self.s_max)));
        }
        if !(self.near_factor > 0.0) {
            return Err(Error::Domain(format!("near_factor must be positive, got {}", self.near_factor)));
        }
        self.driver.validate()
    }

    pub fn base_level(&self) -> u32 {
        dyadic_level(self.dt)
    }

    pub fn horizon_ticks(&self) -> u64 {
        (self.s_max * TICKS_PER_UNIT as f64).floor() as u64
    }

    /// Driving path for one path index.
    pub fn driving_path(&self, key: NoiseKey, mirrored: bool) -> DrivingPath {
        DrivingPath::new(self.driver, key, self.base_level(), self.s_max, mirrored)
    }
}

/// One step of length `h` with driver increment `dxi`, in the variables
/// `(log(r-1), θ, log|f′|)`.
///
/// The noise enters `θ` additively, so the drift is averaged between the
/// start point and an Euler predictor (stochastic Heun); the predictor uses
/// the same increment `dxi`.
pub fn step_with(state: PathState, h: f64, dxi: f64) -> Result<PathState> {
    if h == 0.0 && dxi == 0.0 {
        return Ok(state);
    }
    heun(state, &coefficients(state.rm1, state.theta), h, dxi, 0.0).map(|s| s.expect("no predictor bound"))
}

/// Heun step, or `None` if the predictor overflows or lands where
/// `|z - 1|² < min_pred_w`.
#[inline]
fn heun(state: PathState, c0: &Coefficients, h: f64, dxi: f64, min_pred_w: f64) -> Result<Option<PathState>> {
    let g0 = c0.dr / state.rm1;
    let rm1_p = state.rm1 * (g0 * h).exp();
    let theta_p = state.theta + c0.dtheta * h - dxi;
    let c1 = coefficients(rm1_p, theta_p);
    let g1 = c1.dr / rm1_p;
    if !(c1.w >= min_pred_w && g1.is_finite()) {
        return Ok(None);
    }
    let rm1 = state.rm1 * (0.5 * (g0 + g1) * h).exp();
    if !(rm1 > 0.0) || !rm1.is_finite() {
        return Err(Error::StepSize(format!("r - 1 = {rm1} after step h = {h} from {state:?}")));
    }
    debug_assert!(rm1 >= state.rm1);
    Ok(Some(PathState {
        s: state.s + h,
        r: 1.0 + rm1,
        rm1,
        theta: wrap_angle(state.theta + 0.5 * (c0.dtheta + c1.dtheta) * h - dxi),
        logd: state.logd + 0.5 * (c0.dlogd + c1.dlogd) * h,
    }))
}

/// Below one tick the driver increment is spread linearly over halves.
fn split_tick(state: PathState, h: f64, dxi: f64, near_factor: f64, depth: u32) -> Result<PathState> {
    const MAX_DEPTH: u32 = 40;
    let bound = if depth < MAX_DEPTH { 0.5 * h / near_factor } else { 0.0 };
    if let Some(s) = heun(state, &coefficients(state.rm1, state.theta), h, dxi, bound)? {
        return Ok(s);
    }
    let mid = split_tick(state, 0.5 * h, 0.5 * dxi, near_factor, depth + 1)?;
    split_tick(mid, 0.5 * h, 0.5 * dxi, near_factor, depth + 1)
}

/// Plain Euler–Maruyama step in the same variables, kept as a reference.
pub fn euler_step(state: PathState, h: f64, dxi: f64) -> Result<PathState> {
    let c = coefficients(state.rm1, state.theta);
    let rm1 = state.rm1 * (c.dr / state.rm1 * h).exp();
    if !(rm1 > 0.0) || !rm1.is_finite() {
        return Err(Error::StepSize(format!("r - 1 = {rm1} after step h = {h} from {state:?}")));
    }
    Ok(PathState {
        s: state.s + h,
        r: 1.0 + rm1,
        rm1,
        theta: wrap_angle(state.theta + c.dtheta * h - dxi),
        logd: state.logd + c.dlogd * h,
    })
}

/// One fixed step `cfg.dt`; `noise` is the angle increment added to `θ`
/// (that is `-Δξ`).
pub fn step(state: PathState, cfg: &McConfig, noise: f64) -> Result<PathState> {
    step_with(state, cfg.dt, -noise)
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    pub state: PathState,
    /// `log|f_s′| - s` at the stopping time.
    pub value: f64,
    /// True if the horizon came before `r_stop`.
    pub horizon_reached: bool,
    pub steps: u64,
    /// Smallest `|z_s - 1|²` seen before each step.
    pub min_dist2: f64,
}

/// Integrate from `state` along `path` until `r ≥ r_stop` or `s = horizon`.
///
/// The driving path is read from its time 0; the state's `s` keeps counting
/// from its starting value.
pub fn integrate(
    start: PathState,
    path: &DrivingPath,
    dt_level: u32,
    near_factor: f64,
    r_stop: f64,
    horizon_ticks: u64,
) -> Result<PathOutcome> {
    let horizon_ticks = horizon_ticks.min(path.horizon_ticks());
    let dt_ticks = (1u64 << (TICK_BITS - dt_level.min(TICK_BITS))) as f64;
    let mut state = start;
    let mut now: u64 = 0;
    let mut cursor = path.cursor();
    let mut xi = cursor.angle_at(0);
    let mut steps = 0u64;
    let mut min_dist2 = f64::INFINITY;
    let mut c_now = coefficients(state.rm1, state.theta);
    while now < horizon_ticks && state.r < r_stop {
        let w = c_now.w;
        min_dist2 = min_dist2.min(w);
        // Largest dyadic h with h ≤ dt·max(1, (r-1)²) ≤ 1, h ≤ c·w, aligned
        // at `now`, not past the horizon.
        let far = (dt_ticks * state.rm1.powi(2).max(1.0)).min(TICKS_PER_UNIT as f64);
        let allowed = far.min(near_factor * w * TICKS_PER_UNIT as f64);
        let mut shift = if allowed < 1.0 { 0 } else { 63 - (allowed as u64).leading_zeros() };
        if now != 0 {
            shift = shift.min(now.trailing_zeros());
        }
        while shift > 0 && now + (1u64 << shift) > horizon_ticks {
            shift -= 1;
        }
        // Halve the step while the predictor lands too close to the
        // singular point for its own step size.
        loop {
            let h_ticks = 1u64 << shift;
            let next = now + h_ticks;
            let xi_next = cursor.angle_at(next);
            let h = h_ticks as f64 / TICKS_PER_UNIT as f64;
            if shift == 0 {
                state = split_tick(state, h, xi_next - xi, near_factor, 0)?;
                xi = xi_next;
                now = next;
                break;
            }
            if let Some(s) = heun(state, &c_now, h, xi_next - xi, 0.5 * h / near_factor)? {
                state = s;
                xi = xi_next;
                now = next;
                break;
            }
            shift -= 1;
        }
        c_now = coefficients(state.rm1, state.theta);
        steps += 1;
    }
    state.s = start.s + now as f64 / TICKS_PER_UNIT as f64;
    Ok(PathOutcome { state, value: state.compensated(), horizon_reached: state.r < r_stop, steps, min_dist2 })
}

/// `log|f_s′(z₀)| - s` at the exit time, i.e. a sample of `log|F₀′(z₀)|` up
/// to the truncation at `r_stop`.
pub fn simulate_compensated_path(z0: (f64, f64), cfg: &McConfig, key: NoiseKey) -> Result<PathOutcome> {
    cfg.validate()?;
    let start = PathState::new(z0.0, z0.1)?;
    let path = cfg.driving_path(key, false);
    integrate(start, &path, cfg.base_level(), cfg.near_factor, cfg.r_stop, cfg.horizon_ticks())
}
