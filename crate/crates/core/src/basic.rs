//! Basic adaptive third-order method.
//!
//! Each outer iteration tries the levels `2^i M_t` starting from the
//! smallest `i` with `2^i M_t >= 2 M_0`. A level is abandoned when the inner
//! solver certifies slow convergence or when the trial point fails the
//! functional decrease test; the first accepted level `i_t` gives
//! `M_{t+1} = 2^{i_t - 1} M_t`.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;

use crate::error::{ensure_dim, ensure_positive, Error, Result};
use crate::inner::{run_inner_traced, InnerConfig, StopReason};
use crate::model::{AnchorPoint, ModelAnchor};
use crate::oracle::{CompositeTerm, SmoothOracle};
use crate::report::{RunOutcome, RunReport, RunStatus};
use crate::trace::{OuterRecord, TraceSink};

/// Levels above this are treated as a numerical breakdown.
pub(crate) const MAX_LEVEL: f64 = 1e200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub m0: f64,
    pub epsilon: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub secular_tol: f64,
}

impl SolverConfig {
    pub fn new(epsilon: f64) -> Self {
        Self { m0: 1.0, epsilon, max_outer: 100_000, max_inner: 10_000, secular_tol: 1e-12 }
    }

    pub fn with_m0(mut self, m0: f64) -> Self {
        self.m0 = m0;
        self
    }

    pub fn inner(&self) -> InnerConfig {
        InnerConfig { epsilon: self.epsilon, max_inner: self.max_inner, secular_tol: self.secular_tol }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        ensure_positive("M0", self.m0)?;
        ensure_positive("epsilon", self.epsilon)?;
        if self.max_outer == 0 {
            return Err(Error::Config("max_outer must be positive".into()));
        }
        Ok(())
    }
}

/// Smallest `i >= 0` with `2^i M_t >= 2 M_0`.
pub fn initial_level(m_t: f64, m0: f64) -> Result<u32> {
    ensure_positive("M_t", m_t)?;
    ensure_positive("M0", m0)?;
    let mut i = 0;
    while 2f64.powi(i as i32) * m_t < 2.0 * m0 {
        i += 1;
    }
    Ok(i)
}

/// `f(x_t) - f(x+) >= ||grad f(x+)||^{4/3} / (6 M_level^{1/3})`.
pub fn accept_test_basic(f_x: f64, f_plus: f64, grad_norm_plus: f64, m_level: f64) -> bool {
    f_x - f_plus >= grad_norm_plus.powf(4.0 / 3.0) / (6.0 * m_level.cbrt())
}

pub(crate) struct Counters {
    pub start: crate::oracle::CallCounts,
    pub it: u64,
    pub bgm_e: u64,
    pub bgm_it: u64,
    pub clock: Instant,
}

impl Counters {
    pub fn start<O: SmoothOracle + ?Sized>(oracle: &O) -> Self {
        Self { start: oracle.counters().snapshot(), it: 0, bgm_e: 0, bgm_it: 0, clock: Instant::now() }
    }

    pub fn report<O: SmoothOracle + ?Sized>(&self, oracle: &O, epsilon: f64, grad_norm: f64, f: f64) -> RunReport {
        RunReport {
            epsilon,
            it: self.it,
            co: (oracle.counters().snapshot() - self.start).total(),
            bgm_e: self.bgm_e,
            bgm_it: self.bgm_it,
            bgm_a: RunReport::average(self.bgm_it, self.bgm_e),
            final_grad_norm: grad_norm,
            final_f: f,
            wall_time_s: self.clock.elapsed().as_secs_f64(),
        }
    }
}

pub(crate) fn level(i: u32, m_t: f64) -> Result<f64> {
    let level = 2f64.powi(i as i32) * m_t;
    if !level.is_finite() || level > MAX_LEVEL {
        return Err(Error::LevelOverflow { level });
    }
    Ok(level)
}

pub fn run_basic<O: SmoothOracle + ?Sized>(
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

    let mut x = x0.clone();
    let mut f_x = oracle.value(&x)? + composite.value(&x);
    let mut grad_x: Option<DVector<f64>> = None;
    let mut m_t = cfg.m0;

    loop {
        if counters.it as usize >= cfg.max_outer {
            let g = match grad_x.take() {
                Some(g) => g,
                None => oracle.gradient(&x)?,
            };
            log::warn!("basic method hit the outer cap ({})", cfg.max_outer);
            let report = counters.report(oracle, cfg.epsilon, g.norm(), f_x);
            return Ok(RunOutcome { solution: x, report, status: RunStatus::OuterCapReached });
        }
        let point = match grad_x.take() {
            Some(g) => AnchorPoint::with_gradient(oracle, x.clone(), g)?,
            None => AnchorPoint::new(oracle, x.clone())?,
        };
        let point = Arc::new(point.with_value(f_x));
        let grad_tilde_norm = point.gradient().norm();
        let t = counters.it as usize;

        let mut i = initial_level(m_t, cfg.m0)?;
        loop {
            let m_level = level(i, m_t)?;
            let anchor = ModelAnchor::new(point.clone(), m_level)?;
            let res = run_inner_traced(&anchor, oracle, composite, &inner_cfg, grad_tilde_norm, sink)?;
            counters.bgm_e += 1;
            counters.bgm_it += res.iterations as u64;

            let mut record = |f_plus, grad_norm_plus, accepted| {
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
                        anchor: x.iter().copied().collect(),
                        x_plus: res.x_plus.iter().copied().collect(),
                        f_anchor_iterate: Some(f_x),
                        accel: None,
                    });
                }
            };

            if res.stop_reason == StopReason::IterationCap {
                record(None, None, false);
                let g = oracle.gradient(&x)?;
                let report = counters.report(oracle, cfg.epsilon, g.norm(), f_x);
                return Ok(RunOutcome { solution: x, report, status: RunStatus::InnerCapReached });
            }
            if res.alpha {
                record(None, None, false);
                i += 1;
                continue;
            }

            let grad_plus = oracle.gradient(&res.x_plus)? + &res.g_psi;
            let gn = grad_plus.norm();
            if gn <= cfg.epsilon {
                record(None, Some(gn), false);
                let f_plus = oracle.value(&res.x_plus)? + composite.value(&res.x_plus);
                let report = counters.report(oracle, cfg.epsilon, gn, f_plus);
                return Ok(RunOutcome { solution: res.x_plus, report, status: RunStatus::Converged });
            }
            let f_plus = oracle.value(&res.x_plus)? + composite.value(&res.x_plus);
            let accepted = accept_test_basic(f_x, f_plus, gn, m_level);
            record(Some(f_plus), Some(gn), accepted);
            if accepted {
                x = res.x_plus;
                f_x = f_plus;
                grad_x = Some(grad_plus);
                m_t = m_level / 2.0;
                counters.it += 1;
                break;
            }
            i += 1;
        }
    }
}
