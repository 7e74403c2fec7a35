#![allow(dead_code)]

use std::sync::atomic::{AtomicU64, Ordering};

use ato_core::oracle::{CallCounter, Dataset, SmoothOracle};
use ato_core::Result;
use nalgebra::{DMatrix, DVector};
use rand::{rngs::StdRng, Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut StdRng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(lo..hi))
}

pub fn unit_vec(rng: &mut StdRng, n: usize) -> DVector<f64> {
    loop {
        let v = uniform_vec(rng, n, -1.0, 1.0);
        if v.norm() > 1e-3 {
            return v.normalize();
        }
    }
}

/// Random PSD matrix `B B^T` with a random rank in `1..=n`.
pub fn random_psd(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    let k = rng.random_range(1..=n);
    let b = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
    let h = &b * b.transpose();
    (&h + h.transpose()) * 0.5
}

pub fn random_dataset(rng: &mut StdRng, m: usize, p: usize) -> Dataset {
    let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..p).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
    let labels: Vec<f64> = (0..m).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
    Dataset::from_rows(&rows, &labels).unwrap()
}

/// `f(x) = 1/2 x^T Q x + c^T x`.
pub struct Quadratic {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub counters: CallCounter,
}

impl Quadratic {
    pub fn new(q: DMatrix<f64>, c: DVector<f64>) -> Self {
        Self { q, c, counters: CallCounter::new() }
    }
}

impl SmoothOracle for Quadratic {
    fn dim(&self) -> usize {
        self.c.len()
    }
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(0.5 * x.dot(&(&self.q * x)) + self.c.dot(x))
    }
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.q * x + &self.c)
    }
    fn hessian(&self, _x: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(self.q.clone())
    }
    fn third_directional(&self, _x: &DVector<f64>, _h: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::zeros(self.c.len()))
    }
    fn hessian_trace(&self, _x: &DVector<f64>) -> Result<f64> {
        Ok(self.q.trace())
    }
    fn counters(&self) -> &CallCounter {
        &self.counters
    }
}

/// Delegates to `inner` and tallies invocations on its own, independently of
/// the inner oracle's counters.
pub struct Tally<O> {
    pub inner: O,
    pub calls: AtomicU64,
}

impl<O> Tally<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    fn hit(&self) {
        self.calls.fetch_add(1, Ordering::SeqCst);
    }
}

impl<O: SmoothOracle> SmoothOracle for Tally<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.hit();
        self.inner.value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.hit();
        self.inner.gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.hit();
        self.inner.hessian(x)
    }
    fn third_directional(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<DVector<f64>> {
        self.hit();
        self.inner.third_directional(x, h)
    }
    fn hessian_trace(&self, x: &DVector<f64>) -> Result<f64> {
        self.hit();
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

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
