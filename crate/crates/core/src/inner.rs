//! Bregman gradient method on the regularized model, with the
//! slow-convergence certificate that drives the outer regularization update.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, ensure_positive, Error, Result};
use crate::model::{InnerConstants, ModelAnchor, Spectral};
use crate::oracle::{CompositeTerm, SmoothOracle};
use crate::trace::{InnerRecord, NullSink, TraceSink};

const SECULAR_MAX_ITERS: usize = 200;

/// Coefficient `3^8` of the slow-convergence test.
const THREE_POW_8: f64 = 6561.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StopReason {
    EpsilonSmall,
    ModelStationarity,
    SlowConvergence,
    IterationCap,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerConfig {
    /// Outer target accuracy; the inner method stops once the model gradient drops below `epsilon / 7`.
    pub epsilon: f64,
    pub max_inner: usize,
    pub secular_tol: f64,
}

impl InnerConfig {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon, max_inner: 10_000, secular_tol: 1e-12 }
    }

    fn validate(&self) -> Result<()> {
        ensure_positive("epsilon", self.epsilon)?;
        ensure_positive("secular_tol", self.secular_tol)?;
        if self.max_inner == 0 {
            return Err(Error::Config("max_inner must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct InnerResult {
    pub x_plus: DVector<f64>,
    /// Subgradient of `psi` at `x_plus`; identically zero for [`CompositeTerm::Zero`].
    pub g_psi: DVector<f64>,
    pub alpha: bool,
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// `||grad Omega(x_plus) + g_psi||` at exit.
    pub model_grad_norm: f64,
    pub constants: InnerConstants,
}

/// Solves `(H + (M/2) ||h||^2 I) h = c` for `H = Q diag(lambda) Q^T`, `lambda >= 0`.
///
/// In the eigenbasis `h_i = c_i / (lambda_i + (M/2) r^2)` where `r = ||h||`
/// is the unique root of `||h(r)|| = r`; the left side decreases in `r` and
/// the right side increases, so a safeguarded Newton iteration on the
/// bracket `[0, (2 ||c|| / M)^{1/3}]` finds it.
pub fn secular_solve(eigen: &Spectral, m: f64, c: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
    ensure_positive("M", m)?;
    ensure_positive("tol", tol)?;
    ensure_dim(eigen.dim(), c.len())?;
    let c_norm = c.norm();
    if c_norm == 0.0 {
        return Ok(DVector::zeros(c.len()));
    }
    let ct = eigen.vectors.tr_mul(c);
    let lam = &eigen.values;
    let half_m = 0.5 * m;

    // ||h(r)|| - r and its derivative
    let eval = |r: f64| -> (f64, f64) {
        let s = half_m * r * r;
        let mut norm2 = 0.0;
        let mut weighted = 0.0;
        for (ci, li) in ct.iter().zip(lam.iter()) {
            let d = li + s;
            let hi = ci / d;
            norm2 += hi * hi;
            weighted += hi * hi / d;
        }
        let norm = norm2.sqrt();
        (norm - r, -m * r * weighted / norm - 1.0)
    };

    let mut hi = (2.0 * c_norm / m).cbrt();
    let lam_min = lam.min();
    if lam_min > 0.0 {
        hi = hi.min(c_norm / lam_min);
    }
    let mut lo = 0.0_f64;
    let mut r = hi;
    let target = 0.25 * tol * (1.0 + c_norm);
    let mut converged = false;
    for _ in 0..SECULAR_MAX_ITERS {
        let (f, df) = eval(r);
        // the residual of the linear system is about M r^2 |f|
        if f == 0.0 || m * r * r * f.abs() <= target {
            converged = true;
            break;
        }
        if f > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            converged = true;
            break;
        }
        let newton = r - f / df;
        r = if newton > lo && newton < hi && df.is_finite() { newton } else { 0.5 * (lo + hi) };
    }
    if !converged {
        return Err(Error::RootSearch { what: "secular equation", iterations: SECULAR_MAX_ITERS });
    }
    let s = half_m * r * r;
    let ht = DVector::from_iterator(ct.len(), ct.iter().zip(lam.iter()).map(|(ci, li)| ci / (li + s)));
    Ok(&eigen.vectors * ht)
}

#[derive(Clone, Debug)]
pub struct BregmanStep {
    pub y_next: DVector<f64>,
    /// `-grad Omega(y_k) + 3 [grad rho(y_k) - grad rho(y_next)]`; zero up to the
    /// secular tolerance when `psi = 0`.
    pub g_psi: DVector<f64>,
}

/// One step `argmin_y <grad Omega(y_k), y - y_k> + 3 beta_rho(y_k, y) + psi(y)`.
pub fn bregman_step<O: SmoothOracle + ?Sized>(
    anchor: &ModelAnchor,
    oracle: &O,
    composite: &CompositeTerm,
    y_k: &DVector<f64>,
    tol: f64,
) -> Result<BregmanStep> {
    let grad = anchor.omega_grad(oracle, y_k)?;
    bregman_step_with_grad(anchor, composite, y_k, &grad, tol)
}

pub(crate) fn bregman_step_with_grad(
    anchor: &ModelAnchor,
    composite: &CompositeTerm,
    y_k: &DVector<f64>,
    grad_k: &DVector<f64>,
    tol: f64,
) -> Result<BregmanStep> {
    match composite {
        CompositeTerm::Zero => {}
    }
    let rho_k = anchor.rho_grad(y_k)?;
    // grad rho(y_next) = grad rho(y_k) - grad Omega(y_k) / 3
    let c = &rho_k - grad_k / 3.0;
    let h = secular_solve(anchor.point().spectral(), anchor.m(), &c, tol)?;
    let y_next = anchor.x() + h;
    let g_psi = (rho_k - anchor.rho_grad(&y_next)?) * 3.0 - grad_k;
    Ok(BregmanStep { y_next, g_psi })
}

/// Right-hand side of the slow-convergence test in log form,
/// `ln(3^8 L^4 beta / (2 M 1.2^k))`.
pub fn slow_rhs_ln(constants: &InnerConstants, m: f64, k: usize) -> f64 {
    THREE_POW_8.ln() + 4.0 * constants.l.ln() + constants.beta.ln() - (2.0 * m).ln() - k as f64 * 1.2f64.ln()
}

/// `1 + log_1.2(3^8 (7 L)^4 beta / (2 M) * eps^-4)`, the worst-case inner
/// iteration count.
pub fn iteration_ceiling(constants: &InnerConstants, m: f64, epsilon: f64) -> f64 {
    let ln =
        THREE_POW_8.ln() + 4.0 * (7.0 * constants.l).ln() + constants.beta.ln() - (2.0 * m).ln() - 4.0 * epsilon.ln();
    1.0 + ln / 1.2f64.ln()
}

pub fn run_inner<O: SmoothOracle + ?Sized>(
    anchor: &ModelAnchor,
    oracle: &O,
    composite: &CompositeTerm,
    cfg: &InnerConfig,
    grad_tilde_norm: f64,
) -> Result<InnerResult> {
    run_inner_traced(anchor, oracle, composite, cfg, grad_tilde_norm, &mut NullSink)
}

pub fn run_inner_traced<O: SmoothOracle + ?Sized>(
    anchor: &ModelAnchor,
    oracle: &O,
    composite: &CompositeTerm,
    cfg: &InnerConfig,
    grad_tilde_norm: f64,
    sink: &mut dyn TraceSink,
) -> Result<InnerResult> {
    cfg.validate()?;
    let x = anchor.x();
    if !composite.contains(x) {
        return Err(Error::Config("anchor outside dom psi".into()));
    }
    let constants = anchor.inner_constants(grad_tilde_norm)?;
    let m = anchor.m();
    let n = x.len();

    let mut y = x.clone();
    // grad Omega(x) = grad f(x)
    let mut grad_y = anchor.point().gradient().clone();
    let mut last_norm = grad_y.norm();
    for k in 0..cfg.max_inner {
        let step = bregman_step_with_grad(anchor, composite, &y, &grad_y, cfg.secular_tol)?;
        let y_next = step.y_next;
        let grad_next = anchor.omega_grad(oracle, &y_next)?;
        // psi = 0: the subgradient at y_next is exactly zero
        let g_psi = DVector::zeros(n);
        let big_g = (&grad_next + &g_psi).norm();
        let dist = (&y_next - x).norm();
        let rhs_ln = slow_rhs_ln(&constants, m, k);
        if sink.enabled() {
            sink.inner(&InnerRecord { k, model_grad_norm: big_g, step_norm: dist, slow_rhs: rhs_ln.exp() });
        }

        let done = |stop_reason, alpha| InnerResult {
            x_plus: y_next.clone(),
            g_psi: g_psi.clone(),
            alpha,
            iterations: k + 1,
            stop_reason,
            model_grad_norm: big_g,
            constants,
        };
        if big_g <= cfg.epsilon / 7.0 {
            return Ok(done(StopReason::EpsilonSmall, false));
        }
        if big_g <= m / 6.0 * dist.powi(3) {
            return Ok(done(StopReason::ModelStationarity, false));
        }
        if 4.0 * big_g.ln() > rhs_ln {
            return Ok(done(StopReason::SlowConvergence, true));
        }
        last_norm = big_g;
        y = y_next;
        grad_y = grad_next;
    }
    log::warn!("inner solver hit the iteration cap ({}) at M = {m:e}", cfg.max_inner);
    Ok(InnerResult {
        x_plus: y,
        g_psi: DVector::zeros(n),
        alpha: false,
        iterations: cfg.max_inner,
        stop_reason: StopReason::IterationCap,
        model_grad_norm: last_norm,
        constants,
    })
}
