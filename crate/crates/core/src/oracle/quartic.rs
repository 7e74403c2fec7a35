use nalgebra::{DMatrix, DVector};

use super::{CallCounter, EntryPoint, SmoothOracle};
use crate::error::{ensure_dim, Error, Result};

/// `f(x) = sum_i x_i^4`. Its third derivative is diagonal with entries
/// `24 x_i`, so it is Lipschitz with constant 24, and the minimizer is 0.
#[derive(Debug)]
pub struct QuarticOracle {
    n: usize,
    counters: CallCounter,
}

impl QuarticOracle {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("quartic problem needs n >= 1".into()));
        }
        Ok(Self { n, counters: CallCounter::new() })
    }
}

impl SmoothOracle for QuarticOracle {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        ensure_dim(self.n, x.len())?;
        self.counters.bump(EntryPoint::Value);
        Ok(x.iter().map(|v| v.powi(4)).sum())
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_dim(self.n, x.len())?;
        self.counters.bump(EntryPoint::Gradient);
        Ok(x.map(|v| 4.0 * v.powi(3)))
    }

    fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        ensure_dim(self.n, x.len())?;
        self.counters.bump(EntryPoint::Hessian);
        Ok(DMatrix::from_diagonal(&x.map(|v| 12.0 * v * v)))
    }

    fn third_directional(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_dim(self.n, x.len())?;
        ensure_dim(self.n, h.len())?;
        self.counters.bump(EntryPoint::ThirdDirectional);
        Ok(x.zip_map(h, |xi, hi| 24.0 * xi * hi * hi))
    }

    fn hessian_trace(&self, x: &DVector<f64>) -> Result<f64> {
        ensure_dim(self.n, x.len())?;
        self.counters.bump(EntryPoint::HessianTrace);
        Ok(x.iter().map(|v| 12.0 * v * v).sum())
    }

    fn counters(&self) -> &CallCounter {
        &self.counters
    }

    fn lipschitz_third(&self) -> Option<f64> {
        Some(24.0)
    }

    fn known_minimizer(&self) -> Option<DVector<f64>> {
        Some(DVector::zeros(self.n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    #[test]
    fn minimizer_has_zero_value_and_gradient() {
        let q = QuarticOracle::new(3).unwrap();
        let z = DVector::zeros(3);
        assert_eq!(q.value(&z).unwrap(), 0.0);
        assert_eq!(q.gradient(&z).unwrap().norm(), 0.0);
    }

    #[test]
    fn third_directional_at_one() {
        let q = QuarticOracle::new(1).unwrap();
        let t = q.third_directional(&DVector::from_element(1, 1.0), &DVector::from_element(1, 1.0)).unwrap();
        assert_eq!(t[0], 24.0);
    }

    #[test]
    fn third_derivative_is_24_lipschitz() {
        // For a diagonal tensor the operator norm of the difference is
        // max_i 24 |x_i - y_i| <= 24 ||x - y||.
        let q = QuarticOracle::new(4).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let x = DVector::from_fn(4, |_, _| rng.random_range(-3.0..3.0));
            let y = DVector::from_fn(4, |_, _| rng.random_range(-3.0..3.0));
            let h = DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0)).normalize();
            let dx = q.third_directional(&x, &h).unwrap();
            let dy = q.third_directional(&y, &h).unwrap();
            assert!((dx - dy).norm() <= 24.0 * (&x - &y).norm() + 1e-12);
        }
    }

    #[test]
    fn rejects_wrong_dimension() {
        let q = QuarticOracle::new(2).unwrap();
        assert!(q.value(&DVector::zeros(3)).is_err());
        assert_eq!(q.counters().snapshot().total(), 0);
        assert!(QuarticOracle::new(0).is_err());
    }
}
