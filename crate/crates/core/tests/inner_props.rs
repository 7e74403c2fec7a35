mod common;

use std::sync::Arc;

use ato_core::inner::{bregman_step, run_inner, secular_solve, slow_rhs_ln, InnerConfig, StopReason};
use ato_core::model::{AnchorPoint, ModelAnchor, Spectral};
use ato_core::oracle::{CompositeTerm, LogisticOracle, QuarticOracle, SmoothOracle};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;

use common::{random_dataset, random_psd, rng, uniform_vec};

const ZERO: CompositeTerm = CompositeTerm::Zero;

fn anchor<O: SmoothOracle>(o: &O, x: DVector<f64>, m: f64) -> ModelAnchor {
    ModelAnchor::new(Arc::new(AnchorPoint::new(o, x).unwrap()), m).unwrap()
}

#[test]
fn bregman_iterates_descend_and_stay_in_sublevel_ball() {
    let mut r = rng(21);
    let q = QuarticOracle::new(3).unwrap();
    for _ in 0..60 {
        let m = 96.0 * 2f64.powi(r.random_range(0..4));
        let x = uniform_vec(&mut r, 3, -2.0, 2.0);
        let a = anchor(&q, x.clone(), m);
        let f_x = q.value(&x).unwrap();
        let g_x = q.gradient(&x).unwrap().norm();
        let mut y = x.clone();
        for _ in 0..30 {
            let grad = a.omega_grad(&q, &y).unwrap();
            let step = bregman_step(&a, &q, &ZERO, &y, 1e-12).unwrap();
            let y1 = step.y_next;

            let resid = &grad + (a.rho_grad(&y1).unwrap() - a.rho_grad(&y).unwrap()) * 3.0;
            assert!(resid.norm() <= 1e-12 * (1.0 + grad.norm()) * 10.0, "optimality residual {}", resid.norm());

            let o0 = a.omega_value(&q, &y).unwrap();
            let o1 = a.omega_value(&q, &y1).unwrap();
            assert!(o1 <= o0 + 1e-10 * (1.0 + o0.abs()), "{o1} > {o0}");

            if o1 <= f_x {
                let d = (&y1 - &x).norm();
                assert!(d.powi(3) <= 96.0 * g_x / m * (1.0 + 1e-9) + 1e-12, "{d}^3 > 96 {g_x} / {m}");
            }
            y = y1;
        }
    }
}

fn assert_exit_sound<O: SmoothOracle>(o: &O, a: &ModelAnchor, cfg: &InnerConfig, g: f64) -> StopReason {
    let res = run_inner(a, o, &ZERO, cfg, g).unwrap();
    let big_g = a.omega_grad(o, &res.x_plus).unwrap().norm();
    let dist = (&res.x_plus - a.x()).norm();
    assert!((big_g - res.model_grad_norm).abs() <= 1e-12 * (1.0 + big_g));
    match res.stop_reason {
        StopReason::EpsilonSmall => assert!(big_g <= cfg.epsilon / 7.0),
        StopReason::ModelStationarity => assert!(big_g <= a.m() / 6.0 * dist.powi(3)),
        StopReason::SlowConvergence => {
            assert!(res.alpha);
            let k = res.iterations - 1;
            assert!(4.0 * big_g.ln() > slow_rhs_ln(&res.constants, a.m(), k));
        }
        StopReason::IterationCap => assert_eq!(res.iterations, cfg.max_inner),
    }
    assert_eq!(res.alpha, res.stop_reason == StopReason::SlowConvergence);
    res.stop_reason
}

#[test]
fn exit_conditions_hold_when_recomputed() {
    let mut r = rng(22);
    let q = QuarticOracle::new(4).unwrap();
    let l = LogisticOracle::new(random_dataset(&mut r, 30, 3));
    let mut seen = std::collections::HashSet::new();
    for _ in 0..150 {
        let m = 10f64.powf(r.random_range(-6.0..3.0));
        let eps = 10f64.powf(r.random_range(-9.0..-1.0));
        let cfg = InnerConfig::new(eps);
        let x = uniform_vec(&mut r, 4, -3.0, 3.0);
        let pq = AnchorPoint::new(&q, x.clone()).unwrap();
        let g = pq.gradient().norm();
        seen.insert(assert_exit_sound(&q, &ModelAnchor::new(Arc::new(pq), m).unwrap(), &cfg, g));
        let pl = AnchorPoint::new(&l, x).unwrap();
        let g = pl.gradient().norm();
        seen.insert(assert_exit_sound(&l, &ModelAnchor::new(Arc::new(pl), m).unwrap(), &cfg, g));
    }
    assert!(seen.contains(&StopReason::SlowConvergence));
    assert!(seen.contains(&StopReason::ModelStationarity));
}

#[test]
fn large_regularization_never_certifies_slow_convergence() {
    let mut r = rng(23);
    let q = QuarticOracle::new(5).unwrap();
    for _ in 0..100 {
        let m = 96.0 * 10f64.powf(r.random_range(0.0..4.0));
        let x = uniform_vec(&mut r, 5, -5.0, 5.0);
        let a = anchor(&q, x, m);
        let g = a.point().gradient().norm();
        let res = run_inner(&a, &q, &ZERO, &InnerConfig::new(1e-8), g).unwrap();
        assert!(!res.alpha);
    }
}

#[test]
fn stationary_exit_gives_descent_inequality() {
    let mut r = rng(24);
    let q = QuarticOracle::new(3).unwrap();
    let mut checked = 0;
    for _ in 0..200 {
        let m = 24.0 * 10f64.powf(r.random_range(0.0..3.0));
        let x = uniform_vec(&mut r, 3, -3.0, 3.0);
        let a = anchor(&q, x.clone(), m);
        let g = a.point().gradient().norm();
        let res = run_inner(&a, &q, &ZERO, &InnerConfig::new(1e-10), g).unwrap();
        if res.stop_reason != StopReason::ModelStationarity {
            continue;
        }
        checked += 1;
        let gp = q.gradient(&res.x_plus).unwrap();
        let lhs = gp.dot(&(&x - &res.x_plus));
        let rhs = gp.norm().powf(4.0 / 3.0) / (6.0 * m.cbrt());
        assert!(lhs >= rhs - 1e-8, "{lhs} < {rhs}");
    }
    assert!(checked > 100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn secular_solution_satisfies_equation(seed in 0u64..1_000_000, n in 1usize..=20, logm in -3.0f64..3.0, logc in -4.0f64..4.0) {
        let mut r = rng(seed);
        let h = random_psd(&mut r, n) * 10f64.powf(r.random_range(-2.0..2.0));
        let c = uniform_vec(&mut r, n, -1.0, 1.0) * 10f64.powf(logc);
        let m = 10f64.powf(logm);
        let s = Spectral::new(&h).unwrap();
        let sol = secular_solve(&s, m, &c, 1e-12).unwrap();
        let resid = &h * &sol + &sol * (0.5 * m * sol.norm_squared()) - &c;
        prop_assert!(resid.norm() <= 1e-10 * (1.0 + c.norm()), "residual {}", resid.norm());
    }
}
