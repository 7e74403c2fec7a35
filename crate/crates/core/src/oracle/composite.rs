use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// The simple convex term `psi` of `f + psi`.
///
/// Only `Zero` ships. Other kinds (l1, box indicators) need their own Bregman
/// step and estimating-function solvers, which the solvers reject as
/// unsupported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompositeTerm {
    #[default]
    Zero,
}

impl CompositeTerm {
    /// `psi(x)`, possibly `+inf` outside the domain.
    pub fn value(&self, _x: &DVector<f64>) -> f64 {
        match self {
            CompositeTerm::Zero => 0.0,
        }
    }

    pub fn contains(&self, _x: &DVector<f64>) -> bool {
        match self {
            CompositeTerm::Zero => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, CompositeTerm::Zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_term_is_zero_everywhere() {
        let x = DVector::from_vec(vec![1.0, -3.0, 1e300]);
        let psi = CompositeTerm::default();
        assert_eq!(psi.value(&x), 0.0);
        assert!(psi.contains(&x));
        assert!(psi.is_zero());
    }
}
