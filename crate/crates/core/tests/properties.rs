//! Randomized invariants across modules.

mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use sle_spectrum::cli::config::{merge_config, parse_config};
use sle_spectrum::cli::output::fmt_f64;
use sle_spectrum::exponents::{
    alpha_extremes, average_spectrum, beta_exponent, conjectured_as_spectrum, duplantier_f, gamma_exponent,
    t_extremes, Region, SleParams,
};
use sle_spectrum::loewner::{step_with, PathState};
use sle_spectrum::moments::LogMeanAccumulator;
use sle_spectrum::pde::{chordal_operator_residual, subsupersolution_sign};
use sle_spectrum::special::boundary::{boundary_condition_limit, boundary_ode_residual, boundary_solutions, positivity_threshold};

fn sp(kappa: f64, t: f64) -> SleParams {
    SleParams::new(kappa, t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_is_minus_half_at_tip(kappa in 0.1f64..20.0) {
        let (t_tip, _) = common::thresholds(kappa);
        prop_assert!((gamma_exponent(sp(kappa, t_tip)).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn beta_identity(kappa in 0.1f64..20.0, frac in 0.0f64..1.0) {
        let t = -30.0 + frac * (30.0 + (4.0 + kappa).powi(2) / (8.0 * kappa));
        let p = sp(kappa, t);
        let lhs = beta_exponent(p).unwrap();
        let rhs = t - (4.0 + kappa) * gamma_exponent(p).unwrap() / 2.0;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn spectrum_matches_oracle_and_is_convex(kappa in 0.1f64..20.0, t in -40.0f64..10.0, h in 1e-3f64..0.5) {
        for (region, tip) in [(Region::Whole, true), (Region::Bulk, false)] {
            let (v, _) = average_spectrum(sp(kappa, t), region);
            let (o, _) = common::spectrum(kappa, t, tip);
            prop_assert!((v - o).abs() <= 1e-12 * o.abs().max(1.0), "{v} vs {o}");
            let lo = average_spectrum(sp(kappa, t - h), region).0;
            let hi = average_spectrum(sp(kappa, t + h), region).0;
            prop_assert!(lo + hi - 2.0 * v >= -1e-9, "second difference {}", lo + hi - 2.0 * v);
        }
    }

    #[test]
    fn almost_sure_transition_precedes_mean_transition(kappa in 0.05f64..50.0) {
        let (_, t_max) = t_extremes(kappa);
        prop_assert!(t_max < common::thresholds(kappa).1);
    }

    #[test]
    fn f_vanishes_at_alpha_extremes(kappa in 0.1f64..20.0) {
        prop_assume!((kappa - 4.0).abs() > 1e-3);
        let (a_min, a_max) = alpha_extremes(kappa);
        prop_assert!(duplantier_f(a_min, kappa).unwrap().abs() < 1e-9);
        prop_assert!(duplantier_f(a_max, kappa).unwrap().abs() < 1e-9 * a_max.max(1.0));
    }

    #[test]
    fn tangent_lines_pass_through_minus_one(kappa in 0.1f64..20.0, s in 1.0f64..20.0) {
        let (t_min, t_max) = t_extremes(kappa);
        let (a_min, a_max) = alpha_extremes(kappa);
        // Outside (t_min, t_max) the curve is the line t(1 - 1/α) - 1.
        let t = t_min - s;
        prop_assert!((conjectured_as_spectrum(sp(kappa, t)).0 - (t * (1.0 - 1.0 / a_min) - 1.0)).abs() < 1e-9 * t.abs());
        if a_max.is_finite() {
            let t = t_max + s;
            prop_assert!((conjectured_as_spectrum(sp(kappa, t)).0 - (t * (1.0 - 1.0 / a_max) - 1.0)).abs() < 1e-9 * t.abs());
        }
    }

    #[test]
    fn chordal_solution_is_exact(
        kappa in 0.2f64..16.0,
        frac in 0.0f64..1.0,
        x in -2.0f64..2.0,
        y in 0.01f64..2.0,
    ) {
        let t = -10.0 + frac * (10.0 + (4.0 + kappa).powi(2) / (8.0 * kappa));
        let r = chordal_operator_residual(sp(kappa, t), x, y).unwrap();
        prop_assert!(r.abs() < 1e-8, "{r}");
    }

    #[test]
    fn radial_operator_decreases_in_delta(pair in 0usize..3, theta in 0.3f64..3.1, k in 8i32..20) {
        let (kappa, t) = [(6.0, 1.0), (2.0, -1.0), (8.0 / 3.0, 0.5)][pair];
        let h = 2f64.powi(-k);
        let v: Vec<f64> = [-1.0, -0.5, 0.5, 1.0]
            .iter()
            .map(|&d| subsupersolution_sign(sp(kappa, t), d, theta, &[h]).unwrap().samples[0].value)
            .collect();
        prop_assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
    }

    #[test]
    fn radius_never_decreases(
        rm1 in 1e-6f64..3.0,
        theta in -PI..PI,
        h_exp in 6i32..30,
        dxi in -0.5f64..0.5,
    ) {
        let s0 = PathState::from_rm1(rm1, theta).unwrap();
        let h = 2f64.powi(-h_exp);
        if let Ok(s1) = step_with(s0, h, dxi * h.sqrt()) {
            prop_assert!(s1.r >= s0.r, "{} -> {}", s0.r, s1.r);
        }
    }

    #[test]
    fn reflected_step_is_mirrored(rm1 in 1e-4f64..3.0, theta in 0.01f64..3.1, dxi in -0.1f64..0.1) {
        let h = 2f64.powi(-12);
        let a = step_with(PathState::from_rm1(rm1, theta).unwrap(), h, dxi);
        let b = step_with(PathState::from_rm1(rm1, -theta).unwrap(), h, -dxi);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.r, b.r);
                prop_assert_eq!(a.logd, b.logd);
                prop_assert_eq!(a.theta, -b.theta);
            }
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn log_mean_shift_is_exact(ks in proptest::collection::vec(-4000i32..4000, 1..200), c in -500i32..500) {
        let mut a = LogMeanAccumulator::new();
        let mut b = LogMeanAccumulator::new();
        for &k in &ks {
            let y = k as f64 / 64.0;
            a.push(y);
            b.push(y + c as f64);
        }
        let (la, lb) = (a.finish().unwrap(), b.finish().unwrap());
        prop_assert_eq!(lb.shift, la.shift + c as f64);
        prop_assert_eq!(lb.rel_mean, la.rel_mean);
        prop_assert_eq!(lb.rel_stderr, la.rel_stderr);
    }

    #[test]
    fn csv_floats_round_trip(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), bits);
    }

    #[test]
    fn flags_override_config(kappa in 0.1f64..20.0, other in 0.1f64..20.0, in_argv in any::<bool>()) {
        let mut argv = vec!["prog".to_string(), "spectrum".to_string()];
        if in_argv {
            argv.push(format!("--kappa={kappa}"));
        }
        let entries = parse_config(&format!("kappa = {other}\nt-step = 1\n")).unwrap();
        let merged = merge_config(&argv, &entries);
        let kappas: Vec<&String> = merged.iter().filter(|a| a.starts_with("--kappa")).collect();
        prop_assert_eq!(kappas.len(), 1);
        let expected = if in_argv { kappa } else { other };
        prop_assert_eq!(kappas[0].clone(), format!("--kappa={expected}"));
        prop_assert!(merged.contains(&"--t-step=1".to_string()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn boundary_ode_holds(kappa in 0.3f64..16.0, frac in 0.02f64..0.98, x in 0.01f64..3.99) {
        let (lo, hi) = (positivity_threshold(kappa), boundary_condition_limit(kappa));
        let t = lo + frac * (hi - lo);
        let s = boundary_solutions(sp(kappa, t)).unwrap();
        let r = boundary_ode_residual(&s, x).unwrap();
        prop_assert!(r.abs() < 1e-8, "({kappa}, {t}, {x}): {r}");
    }
}
