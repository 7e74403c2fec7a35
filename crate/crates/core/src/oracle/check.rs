use nalgebra::DVector;
use rand::{rngs::StdRng, Rng, SeedableRng};
use serde::Serialize;

use super::SmoothOracle;
use crate::error::Result;

/// Worst error per derivative order, measured as `||fd - exact|| / (1 + ||exact||)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DerivativeReport {
    pub gradient_err: f64,
    pub hessian_err: f64,
    pub third_err: f64,
    pub tol: f64,
}

impl DerivativeReport {
    pub fn gradient_ok(&self) -> bool {
        self.gradient_err <= self.tol
    }

    pub fn hessian_ok(&self) -> bool {
        self.hessian_err <= self.tol
    }

    pub fn third_ok(&self) -> bool {
        self.third_err <= self.tol
    }

    pub fn passed(&self) -> bool {
        self.gradient_ok() && self.hessian_ok() && self.third_ok()
    }
}

/// [`check_derivatives_with`] using five directions and a fixed seed.
pub fn check_derivatives<O: SmoothOracle + ?Sized>(oracle: &O, x: &DVector<f64>, tol: f64) -> Result<DerivativeReport> {
    check_derivatives_with(oracle, x, tol, 5, 0x5eed)
}

/// Compares the analytic derivatives of `oracle` at `x` against finite
/// differences of the next-lower order along random unit directions.
///
/// Each difference quotient is Richardson-extrapolated over steps `e` and
/// `e/2`, which removes the leading truncation term.
pub fn check_derivatives_with<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x: &DVector<f64>,
    tol: f64,
    directions: usize,
    seed: u64,
) -> Result<DerivativeReport> {
    let n = oracle.dim();
    let mut rng = StdRng::seed_from_u64(seed);
    let scale = 1.0 + x.amax();
    let g = oracle.gradient(x)?;
    let hess = oracle.hessian(x)?;

    let rel = |fd: &DVector<f64>, exact: &DVector<f64>| (fd - exact).norm() / (1.0 + exact.norm());
    let richardson = |coarse: DVector<f64>, fine: DVector<f64>, order: i32| {
        let w = 2f64.powi(order);
        (fine * w - coarse) / (w - 1.0)
    };

    let mut report = DerivativeReport { gradient_err: 0.0, hessian_err: 0.0, third_err: 0.0, tol };
    for _ in 0..directions {
        let h = loop {
            let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let norm = v.norm();
            if norm > 1e-3 {
                break v / norm;
            }
        };

        // order 1: <grad f, h> against central differences of f
        let dir_fd = |e: f64| -> Result<DVector<f64>> {
            let fp = oracle.value(&(x + &h * e))?;
            let fm = oracle.value(&(x - &h * e))?;
            Ok(DVector::from_element(1, (fp - fm) / (2.0 * e)))
        };
        let e1 = 1e-3 * scale;
        let fd = richardson(dir_fd(e1)?, dir_fd(e1 / 2.0)?, 2);
        let exact = DVector::from_element(1, g.dot(&h));
        report.gradient_err = report.gradient_err.max(rel(&fd, &exact));

        // order 2: H h against central differences of the gradient
        let grad_fd = |e: f64| -> Result<DVector<f64>> {
            let gp = oracle.gradient(&(x + &h * e))?;
            let gm = oracle.gradient(&(x - &h * e))?;
            Ok((gp - gm) / (2.0 * e))
        };
        let fd = richardson(grad_fd(e1)?, grad_fd(e1 / 2.0)?, 2);
        report.hessian_err = report.hessian_err.max(rel(&fd, &(&hess * &h)));

        // order 3: D3f[h]^2 against second differences of the gradient
        let second_fd = |e: f64| -> Result<DVector<f64>> {
            let gp = oracle.gradient(&(x + &h * e))?;
            let gm = oracle.gradient(&(x - &h * e))?;
            Ok((gp + gm - &g * 2.0) / (e * e))
        };
        let e3 = 1e-2 * scale;
        let fd = richardson(second_fd(e3)?, second_fd(e3 / 2.0)?, 2);
        let exact = oracle.third_directional(x, &h)?;
        report.third_err = report.third_err.max(rel(&fd, &exact));
    }
    Ok(report)
}
