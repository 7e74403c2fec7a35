use nalgebra::{DMatrix, DVector};

use super::{CallCounter, SmoothOracle};
use crate::error::{ensure_dim, ensure_positive, Result};

/// Second central difference of the gradient,
/// `T_tau(h) = [grad f(x + tau h) + grad f(x - tau h) - 2 grad f(x)] / tau^2`.
///
/// Approximates `D3f(x)[h]^2` with error at most `(L/3) tau ||h||^3` when the
/// third derivative is `L`-Lipschitz. Costs three gradient calls.
pub fn fd_third_directional<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x: &DVector<f64>,
    h: &DVector<f64>,
    tau: f64,
) -> Result<DVector<f64>> {
    ensure_positive("tau", tau)?;
    ensure_dim(oracle.dim(), h.len())?;
    let g0 = oracle.gradient(x)?;
    let step = h * tau;
    let gp = oracle.gradient(&(x + &step))?;
    let gm = oracle.gradient(&(x - &step))?;
    Ok((gp + gm - g0 * 2.0) / (tau * tau))
}

/// Replaces the third-order entry point of `inner` by [`fd_third_directional`],
/// so the solvers only consume first and second order information.
///
/// Counters are those of `inner`: one finite-difference direction shows up as
/// three gradient calls.
#[derive(Debug)]
pub struct FiniteDifferenceOracle<O> {
    inner: O,
    tau: f64,
}

impl<O: SmoothOracle> FiniteDifferenceOracle<O> {
    pub fn new(inner: O, tau: f64) -> Result<Self> {
        ensure_positive("tau", tau)?;
        Ok(Self { inner, tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: SmoothOracle> SmoothOracle for FiniteDifferenceOracle<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.inner.value(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.inner.gradient(x)
    }

    fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.inner.hessian(x)
    }

    fn third_directional(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<DVector<f64>> {
        fd_third_directional(&self.inner, x, h, self.tau)
    }

    fn hessian_trace(&self, x: &DVector<f64>) -> Result<f64> {
        self.inner.hessian_trace(x)
    }

    fn counters(&self) -> &CallCounter {
        self.inner.counters()
    }

    fn lipschitz_third(&self) -> Option<f64> {
        self.inner.lipschitz_third()
    }

    fn known_minimizer(&self) -> Option<DVector<f64>> {
        self.inner.known_minimizer()
    }
}
