//! Problem oracles: the smooth part `f` and the composite term `psi`.
//!
//! Third derivatives are only ever exposed through their directional action
//! `D3f(x)[h]^2`, a vector of length `n`; the tensor itself is never built.

mod check;
mod composite;
mod counter;
mod fd;
mod logistic;
mod quartic;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

pub use check::{check_derivatives, check_derivatives_with, DerivativeReport};
pub use composite::CompositeTerm;
pub use counter::{CallCounter, CallCounts, EntryPoint};
pub use fd::{fd_third_directional, FiniteDifferenceOracle};
pub use logistic::{Dataset, LogisticOracle};
pub use quartic::QuarticOracle;

/// Zeroth to third order information about a convex `f: R^n -> R`.
///
/// Every successful call to one of the five evaluation entry points bumps the
/// matching slot of [`SmoothOracle::counters`] by exactly one.
pub trait SmoothOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &DVector<f64>) -> Result<f64>;

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>>;

    fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// `D3f(x)[h]^2`, homogeneous of degree two in `h`.
    fn third_directional(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<DVector<f64>>;

    fn hessian_trace(&self, x: &DVector<f64>) -> Result<f64>;

    fn counters(&self) -> &CallCounter;

    /// Lipschitz constant of the third derivative, when known.
    fn lipschitz_third(&self) -> Option<f64> {
        None
    }

    fn known_minimizer(&self) -> Option<DVector<f64>> {
        None
    }
}

macro_rules! forward_oracle {
    ($($ty:ty),*) => {$(
        impl<T: SmoothOracle + ?Sized> SmoothOracle for $ty {
            fn dim(&self) -> usize { (**self).dim() }
            fn value(&self, x: &DVector<f64>) -> Result<f64> { (**self).value(x) }
            fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> { (**self).gradient(x) }
            fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> { (**self).hessian(x) }
            fn third_directional(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<DVector<f64>> {
                (**self).third_directional(x, h)
            }
            fn hessian_trace(&self, x: &DVector<f64>) -> Result<f64> { (**self).hessian_trace(x) }
            fn counters(&self) -> &CallCounter { (**self).counters() }
            fn lipschitz_third(&self) -> Option<f64> { (**self).lipschitz_third() }
            fn known_minimizer(&self) -> Option<DVector<f64>> { (**self).known_minimizer() }
        }
    )*};
}

forward_oracle!(&T, Box<T>, Arc<T>);
