//! Accelerated adaptive third-order method.
//!
//! The estimating function for `psi = 0` is
//! `phi_t(x) = 1/4 ||x - x0||^4 + <s_t, x> + c_t` with
//! `s_t = sum_k a_k grad f(x_{k+1})` and
//! `c_t = sum_k a_k [f(x_{k+1}) - <grad f(x_{k+1}), x_{k+1}>]`, whose minimizer
//! is `v_t = x0 - s_t / ||s_t||^{2/3}`.

use std::sync::Arc;

use nalgebra::DVector;

use crate::basic::{initial_level, level, Counters, SolverConfig};
use crate::error::{ensure_dim, ensure_positive, Error, Result};
use crate::inner::{run_inner_traced, StopReason};
use crate::model::{AnchorPoint, ModelAnchor};
use crate::oracle::{CompositeTerm, SmoothOracle};
use crate::report::{RunOutcome, RunStatus};
use crate::trace::{AccelInfo, OuterRecord, TraceSink};

const SOLVE_A_MAX_ITERS: usize = 200;
const EIGHTEEN_CUBED: f64 = 5832.0;

/// Unique `a > 0` with `a^4 = 16 (A + a)^3 / (18^3 M)`.
pub fn solve_a(big_a: f64, m_level: f64, tol: f64) -> Result<f64> {
    ensure_positive("M_level", m_level)?;
    ensure_positive("tol", tol)?;
    if !big_a.is_finite() || big_a < 0.0 {
        return Err(Error::Config(format!("A must be nonnegative, got {big_a}")));
    }
    let k = EIGHTEEN_CUBED * m_level;
    if big_a == 0.0 {
        return Ok(16.0 / k);
    }
    // g(a) = k a^4 - 16 (A + a)^3, negative at 0 and eventually positive
    let g = |a: f64| k * a.powi(4) - 16.0 * (big_a + a).powi(3);
    let dg = |a: f64| 4.0 * k * a.powi(3) - 48.0 * (big_a + a).powi(2);

    let mut hi = (16.0 * (big_a + 1.0).powi(3) / k).powf(0.25).max(1.0) * 4.0;
    let mut expansions = 0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 2000 || !hi.is_finite() {
            return Err(Error::RootSearch { what: "coefficient bracket", iterations: expansions });
        }
    }
    let mut lo = 0.0;
    let mut a = hi;
    for _ in 0..SOLVE_A_MAX_ITERS {
        let ga = g(a);
        let scale = 16.0 * (big_a + a).powi(3);
        if ga.abs() <= tol * scale {
            return Ok(a);
        }
        if ga > 0.0 {
            hi = a;
        } else {
            lo = a;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(a);
        }
        let newton = a - ga / dg(a);
        a = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::RootSearch { what: "coefficient equation", iterations: SOLVE_A_MAX_ITERS })
}

/// `z = (1 - gamma) x_t + gamma v_t` with `gamma = a / (A + a)`.
pub fn mix_z(x_t: &DVector<f64>, v_t: &DVector<f64>, big_a: f64, a: f64) -> DVector<f64> {
    let gamma = a / (big_a + a);
    x_t * (1.0 - gamma) + v_t * gamma
}

/// `<grad f(x+), z - x+> >= ||grad f(x+)||^{4/3} / (6 M_level^{1/3})`.
pub fn accept_test_accel(grad_plus: &DVector<f64>, z: &DVector<f64>, x_plus: &DVector<f64>, m_level: f64) -> bool {
    grad_plus.dot(&(z - x_plus)) >= grad_plus.norm().powf(4.0 / 3.0) / (6.0 * m_level.cbrt())
}

/// Iterate, estimating function and coefficient sum of the accelerated method.
#[derive(Clone, Debug)]
pub struct AccelState {
    pub x: DVector<f64>,
    pub v: DVector<f64>,
    pub x0: DVector<f64>,
    pub big_a: f64,
    /// Linear part `s_t` of `phi_t`.
    pub lin_acc: DVector<f64>,
    /// Constant part `c_t` of `phi_t`.
    pub const_acc: f64,
    pub m_t: f64,
    pub t: usize,
}

impl AccelState {
    pub fn new(x0: DVector<f64>, m0: f64) -> Self {
        let n = x0.len();
        Self { x: x0.clone(), v: x0.clone(), x0, big_a: 0.0, lin_acc: DVector::zeros(n), const_acc: 0.0, m_t: m0, t: 0 }
    }

    pub fn phi(&self, x: &DVector<f64>) -> f64 {
        0.25 * (x - &self.x0).norm_squared().powi(2) + self.lin_acc.dot(x) + self.const_acc
    }

    /// `min phi_t = <s, x0> - 3/4 ||s||^{4/3} + c`.
    pub fn phi_star(&self) -> f64 {
        let s = self.lin_acc.norm();
        self.lin_acc.dot(&self.x0) - 0.75 * s.powf(4.0 / 3.0) + self.const_acc
    }

    /// Adds `a [f(x_next) + <grad f(x_next), x - x_next>]` to `phi` and moves
    /// `v` to the new minimizer.
    pub fn update_phi_and_v(
        &mut self,
        composite: &CompositeTerm,
        a: f64,
        x_next: &DVector<f64>,
        f_next: f64,
        grad_next: &DVector<f64>,
    ) -> Result<()> {
        match composite {
            CompositeTerm::Zero => {}
        }
        self.lin_acc += grad_next * a;
        self.const_acc += a * (f_next - grad_next.dot(x_next));
        self.big_a += a;
        self.v = minimizer(&self.x0, &self.lin_acc);
        Ok(())
    }
}

fn minimizer(x0: &DVector<f64>, s: &DVector<f64>) -> DVector<f64> {
    let norm = s.norm();
    if norm == 0.0 {
        x0.clone()
    } else {
        x0 - s / norm.powf(2.0 / 3.0)
    }
}

pub fn run_accel<O: SmoothOracle + ?Sized>(
    oracle: &O,
    composite: &CompositeTerm,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    sink: &mut dyn TraceSink,
) -> Result<RunOutcome> {
    cfg.validate()?;
    ensure_dim(oracle.dim(), x0.len())?;
    if !composite.contains(x0) {
        return Err(Error::Config("x0 outside dom psi".into()));
    }
    let inner_cfg = cfg.inner();
    let mut counters = Counters::start(oracle);
    let mut st = AccelState::new(x0.clone(), cfg.m0);
    // f and grad f at the current iterate, when already evaluated
    let mut f_x: Option<f64> = None;
    let mut grad_x: Option<DVector<f64>> = None;
    let mut cached: Option<Arc<AnchorPoint>> = None;

    loop {
        if st.t >= cfg.max_outer {
            log::warn!("accelerated method hit the outer cap ({})", cfg.max_outer);
            return cap_outcome(oracle, composite, &counters, cfg, st.x, f_x, grad_x, RunStatus::OuterCapReached);
        }
        let mut i = initial_level(st.m_t, cfg.m0)?;
        loop {
            let m_level = level(i, st.m_t)?;
            let a = solve_a(st.big_a, m_level, 1e-12)?;
            let gamma = a / (st.big_a + a);
            let z = mix_z(&st.x, &st.v, st.big_a, a);

            let point = match cached.take() {
                Some(p) if p.x() == &z => p,
                _ => Arc::new(AnchorPoint::new(oracle, z.clone())?),
            };
            cached = Some(point.clone());
            let grad_tilde_norm = point.gradient().norm();
            let anchor = ModelAnchor::new(point, m_level)?;
            let res = run_inner_traced(&anchor, oracle, composite, &inner_cfg, grad_tilde_norm, sink)?;
            counters.bgm_e += 1;
            counters.bgm_it += res.iterations as u64;

            let t = st.t;
            let mut record = |st: &AccelState, f_plus, grad_norm_plus, accepted| {
                if sink.enabled() {
                    sink.outer(&OuterRecord {
                        t,
                        i,
                        m_level,
                        alpha: res.alpha,
                        inner_iters: res.iterations,
                        stop_reason: res.stop_reason,
                        f_plus,
                        grad_norm_plus,
                        accepted,
                        anchor: z.iter().copied().collect(),
                        x_plus: res.x_plus.iter().copied().collect(),
                        f_anchor_iterate: f_x,
                        accel: Some(AccelInfo {
                            big_a: st.big_a,
                            a,
                            gamma,
                            v_dist: (&st.v - &st.x0).norm(),
                            phi_star: st.phi_star(),
                        }),
                    });
                }
            };

            if res.stop_reason == StopReason::IterationCap {
                record(&st, None, None, false);
                return cap_outcome(oracle, composite, &counters, cfg, st.x, f_x, grad_x, RunStatus::InnerCapReached);
            }
            if res.alpha {
                record(&st, None, None, false);
                i += 1;
                continue;
            }
            let grad_plus = oracle.gradient(&res.x_plus)? + &res.g_psi;
            let gn = grad_plus.norm();
            if gn <= cfg.epsilon {
                record(&st, None, Some(gn), false);
                let f_plus = oracle.value(&res.x_plus)? + composite.value(&res.x_plus);
                let report = counters.report(oracle, cfg.epsilon, gn, f_plus);
                return Ok(RunOutcome { solution: res.x_plus, report, status: RunStatus::Converged });
            }
            if accept_test_accel(&grad_plus, &z, &res.x_plus, m_level) {
                let f_plus = oracle.value(&res.x_plus)? + composite.value(&res.x_plus);
                st.update_phi_and_v(composite, a, &res.x_plus, f_plus, &grad_plus)?;
                st.x = res.x_plus.clone();
                st.m_t = m_level / 2.0;
                st.t += 1;
                counters.it += 1;
                record(&st, Some(f_plus), Some(gn), true);
                f_x = Some(f_plus);
                grad_x = Some(grad_plus);
                break;
            }
            record(&st, None, Some(gn), false);
            i += 1;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cap_outcome<O: SmoothOracle + ?Sized>(
    oracle: &O,
    composite: &CompositeTerm,
    counters: &Counters,
    cfg: &SolverConfig,
    x: DVector<f64>,
    f_x: Option<f64>,
    grad_x: Option<DVector<f64>>,
    status: RunStatus,
) -> Result<RunOutcome> {
    let f = match f_x {
        Some(f) => f,
        None => oracle.value(&x)? + composite.value(&x),
    };
    let g = match grad_x {
        Some(g) => g,
        None => oracle.gradient(&x)?,
    };
    let report = counters.report(oracle, cfg.epsilon, g.norm(), f);
    Ok(RunOutcome { solution: x, report, status })
}
