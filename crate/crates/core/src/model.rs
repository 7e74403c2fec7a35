//! The quartic-regularized third-order model around an anchor `x`:
//!
//! ```text
//! Phi_x(y)     = f(x) + <g, h> + 1/2 <H h, h> + 1/6 <D3f(x)[h]^2, h>,   h = y - x
//! Omega_x,M(y) = Phi_x(y) + (M/2) d4(h),                                d4(h) = ||h||^4 / 4
//! rho_x(y)     = 1/2 <H h, h> + (M/2) d4(h)
//! ```
//!
//! `rho_x` is the scaling function the inner Bregman method works with.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{ensure_dim, ensure_positive, Error, Result};
use crate::oracle::SmoothOracle;

/// Eigenvalues below `-NEG_EIG_TOL * max(1, |lambda|_max)` are treated as a
/// convexity violation; anything between that and zero is clamped.
pub const NEG_EIG_TOL: f64 = 1e-10;

pub fn d4_value(h: &DVector<f64>) -> f64 {
    let s = h.norm_squared();
    0.25 * s * s
}

pub fn d4_grad(h: &DVector<f64>) -> DVector<f64> {
    h * h.norm_squared()
}

/// Orthonormal eigendecomposition `H = Q diag(lambda) Q^T` with `lambda >= 0`.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectral {
    pub fn new(h: &DMatrix<f64>) -> Result<Self> {
        let eig = SymmetricEigen::new(h.clone());
        let scale = eig.eigenvalues.amax().max(1.0);
        let min = eig.eigenvalues.min();
        if min < -NEG_EIG_TOL * scale {
            return Err(Error::NonConvex { eigenvalue: min });
        }
        Ok(Self { values: eig.eigenvalues.map(|l| l.max(0.0)), vectors: eig.eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.vectors * DMatrix::from_diagonal(&self.values) * self.vectors.transpose()
    }
}

/// Derivatives of `f` frozen at one point. Shared by every regularization
/// level tried at that point.
#[derive(Debug)]
pub struct AnchorPoint {
    x: DVector<f64>,
    g: DVector<f64>,
    hess: DMatrix<f64>,
    trace: f64,
    spectral: Spectral,
    f_x: OnceLock<f64>,
}

impl AnchorPoint {
    pub fn new<O: SmoothOracle + ?Sized>(oracle: &O, x: DVector<f64>) -> Result<Self> {
        ensure_dim(oracle.dim(), x.len())?;
        let g = oracle.gradient(&x)?;
        Self::with_gradient(oracle, x, g)
    }

    /// Reuses an already evaluated gradient; only the Hessian is requested.
    pub fn with_gradient<O: SmoothOracle + ?Sized>(oracle: &O, x: DVector<f64>, g: DVector<f64>) -> Result<Self> {
        ensure_dim(oracle.dim(), x.len())?;
        ensure_dim(oracle.dim(), g.len())?;
        let hess = oracle.hessian(&x)?;
        Self::from_parts(x, g, hess)
    }

    pub fn from_parts(x: DVector<f64>, g: DVector<f64>, hess: DMatrix<f64>) -> Result<Self> {
        ensure_dim(x.len(), g.len())?;
        ensure_dim(x.len(), hess.nrows())?;
        ensure_dim(x.len(), hess.ncols())?;
        let spectral = Spectral::new(&hess)?;
        // trace(H) comes from the diagonal we already hold
        let trace = hess.trace();
        Ok(Self { x, g, hess, trace, spectral, f_x: OnceLock::new() })
    }

    pub fn with_value(self, f_x: f64) -> Self {
        let _ = self.f_x.set(f_x);
        self
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn gradient(&self) -> &DVector<f64> {
        &self.g
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hess
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// `f(x)`, evaluated on first use unless supplied via [`Self::with_value`].
    pub fn value<O: SmoothOracle + ?Sized>(&self, oracle: &O) -> Result<f64> {
        if let Some(v) = self.f_x.get() {
            return Ok(*v);
        }
        let v = oracle.value(&self.x)?;
        Ok(*self.f_x.get_or_init(|| v))
    }
}

/// `(L_{x,M}, beta_{x,M})`, the relative-smoothness constant and the initial
/// Bregman distance bound of the inner method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerConstants {
    pub l: f64,
    pub beta: f64,
}

/// An anchor point paired with a regularization level `M > 0`.
#[derive(Clone, Debug)]
pub struct ModelAnchor {
    point: Arc<AnchorPoint>,
    m: f64,
}

impl ModelAnchor {
    pub fn new(point: Arc<AnchorPoint>, m: f64) -> Result<Self> {
        ensure_positive("M", m)?;
        Ok(Self { point, m })
    }

    pub fn point(&self) -> &AnchorPoint {
        &self.point
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.point.x
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    fn displacement(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_dim(self.point.x.len(), y.len())?;
        Ok(y - &self.point.x)
    }

    fn third<O: SmoothOracle + ?Sized>(&self, oracle: &O, h: &DVector<f64>) -> Result<DVector<f64>> {
        if h.iter().all(|v| *v == 0.0) {
            return Ok(DVector::zeros(h.len()));
        }
        oracle.third_directional(&self.point.x, h)
    }

    pub fn taylor3_value<O: SmoothOracle + ?Sized>(&self, oracle: &O, y: &DVector<f64>) -> Result<f64> {
        let h = self.displacement(y)?;
        let t = self.third(oracle, &h)?;
        let p = &self.point;
        Ok(p.value(oracle)? + p.g.dot(&h) + 0.5 * h.dot(&(&p.hess * &h)) + t.dot(&h) / 6.0)
    }

    pub fn omega_value<O: SmoothOracle + ?Sized>(&self, oracle: &O, y: &DVector<f64>) -> Result<f64> {
        let h = self.displacement(y)?;
        Ok(self.taylor3_value(oracle, y)? + 0.5 * self.m * d4_value(&h))
    }

    /// `g + H h + 1/2 D3f(x)[h]^2 + (M/2) ||h||^2 h`, one third-order call.
    pub fn omega_grad<O: SmoothOracle + ?Sized>(&self, oracle: &O, y: &DVector<f64>) -> Result<DVector<f64>> {
        let h = self.displacement(y)?;
        let t = self.third(oracle, &h)?;
        let p = &self.point;
        Ok(&p.g + &p.hess * &h + t * 0.5 + d4_grad(&h) * (0.5 * self.m))
    }

    pub fn rho_value(&self, y: &DVector<f64>) -> Result<f64> {
        let h = self.displacement(y)?;
        Ok(0.5 * h.dot(&(&self.point.hess * &h)) + 0.5 * self.m * d4_value(&h))
    }

    pub fn rho_grad(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let h = self.displacement(y)?;
        Ok(&self.point.hess * &h + d4_grad(&h) * (0.5 * self.m))
    }

    /// `rho(v) - rho(u) - <grad rho(u), v - u>`.
    pub fn bregman_div(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        ensure_dim(u.len(), v.len())?;
        Ok(self.rho_value(v)? - self.rho_value(u)? - self.rho_grad(u)?.dot(&(v - u)))
    }

    /// `grad_tilde_norm` is the norm of any subgradient of `f + psi` at the
    /// anchor; for `psi = 0` that is `||grad f(x)||`.
    pub fn inner_constants(&self, grad_tilde_norm: f64) -> Result<InnerConstants> {
        inner_constants(self.point.trace, self.m, grad_tilde_norm)
    }
}

pub fn inner_constants(trace_h: f64, m: f64, grad_tilde_norm: f64) -> Result<InnerConstants> {
    ensure_positive("M", m)?;
    let r = 96.0 * grad_tilde_norm / m;
    let r23 = r.powf(2.0 / 3.0);
    let r43 = r23 * r23;
    Ok(InnerConstants { l: trace_h + 1.5 * m * r23, beta: 0.5 * trace_h * r23 + m / 8.0 * r43 })
}
