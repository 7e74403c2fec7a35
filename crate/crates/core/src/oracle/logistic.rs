use nalgebra::{DMatrix, DVector};

use super::{CallCounter, EntryPoint, SmoothOracle};
use crate::error::{ensure_dim, Error, Result};

/// Binary classification data. The first feature column is the intercept and
/// is identically one.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: DVector<f64>,
}

impl Dataset {
    /// Takes a feature matrix that already carries the intercept column.
    pub fn new(features: DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch { expected: features.nrows(), got: labels.len() });
        }
        for (row, v) in features.column(0).iter().enumerate() {
            if *v != 1.0 {
                return Err(Error::Dataset { row: row + 1, msg: format!("intercept column must be 1, found {v}") });
            }
        }
        for (row, b) in labels.iter().enumerate() {
            if *b != 0.0 && *b != 1.0 {
                return Err(Error::Dataset { row: row + 1, msg: format!("label must be 0 or 1, found {b}") });
            }
        }
        if let Some((row, _)) = features.row_iter().enumerate().find(|(_, r)| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::Dataset { row: row + 1, msg: "non-finite feature".into() });
        }
        Ok(Self { features, labels })
    }

    /// Builds a dataset from raw feature rows, prepending the intercept.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[f64]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::EmptyDataset);
        }
        let p = rows[0].len();
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::Dataset { row: row + 1, msg: format!("expected {p} features, found {}", r.len()) });
        }
        let features = DMatrix::from_fn(m, p + 1, |i, j| if j == 0 { 1.0 } else { rows[i][j - 1] });
        Self::new(features, DVector::from_column_slice(labels))
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }

    pub fn samples(&self) -> usize {
        self.features.nrows()
    }

    /// Dimension of the parameter vector, intercept included.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }
}

/// Unregularized logistic loss
/// `f(x) = -sum_i [b_i log s_i + (1 - b_i) log(1 - s_i)]`, `s_i = sigma(<a_i, x>)`.
#[derive(Debug)]
pub struct LogisticOracle {
    data: Dataset,
    counters: CallCounter,
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

// log(1 + e^u) without overflow.
fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

impl LogisticOracle {
    pub fn new(data: Dataset) -> Self {
        Self { data, counters: CallCounter::new() }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    fn margins(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.data.features * x
    }
}

impl SmoothOracle for LogisticOracle {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        ensure_dim(self.dim(), x.len())?;
        self.counters.bump(EntryPoint::Value);
        let u = self.margins(x);
        // -[b log s + (1-b) log(1-s)] = log(1 + e^u) - b u
        Ok(u.iter().zip(self.data.labels.iter()).map(|(&u, &b)| softplus(u) - b * u).sum())
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_dim(self.dim(), x.len())?;
        self.counters.bump(EntryPoint::Gradient);
        let r = self.margins(x).zip_map(&self.data.labels, |u, b| sigmoid(u) - b);
        Ok(self.data.features.tr_mul(&r))
    }

    fn hessian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        ensure_dim(self.dim(), x.len())?;
        self.counters.bump(EntryPoint::Hessian);
        let w = self.margins(x).map(|u| {
            let s = sigmoid(u);
            (s * (1.0 - s)).sqrt()
        });
        // B^T B with B = diag(sqrt(w)) A is symmetric to the last bit.
        let mut b = self.data.features.clone();
        for (mut row, wi) in b.row_iter_mut().zip(w.iter()) {
            row *= *wi;
        }
        Ok(b.tr_mul(&b))
    }

    fn third_directional(&self, x: &DVector<f64>, h: &DVector<f64>) -> Result<DVector<f64>> {
        ensure_dim(self.dim(), x.len())?;
        ensure_dim(self.dim(), h.len())?;
        self.counters.bump(EntryPoint::ThirdDirectional);
        let ah = &self.data.features * h;
        let coef = self.margins(x).zip_map(&ah, |u, d| {
            let s = sigmoid(u);
            s * (1.0 - s) * (1.0 - 2.0 * s) * d * d
        });
        Ok(self.data.features.tr_mul(&coef))
    }

    fn hessian_trace(&self, x: &DVector<f64>) -> Result<f64> {
        ensure_dim(self.dim(), x.len())?;
        self.counters.bump(EntryPoint::HessianTrace);
        Ok(self
            .margins(x)
            .iter()
            .zip(self.data.features.row_iter())
            .map(|(&u, row)| {
                let s = sigmoid(u);
                s * (1.0 - s) * row.norm_squared()
            })
            .sum())
    }

    fn counters(&self) -> &CallCounter {
        &self.counters
    }
}
