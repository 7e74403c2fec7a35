//! Python bindings. Vectors cross the boundary as lists of floats and
//! matrices as lists of rows.

use std::sync::Arc;

use ato_core::basic::SolverConfig;
use ato_core::harness::{self, SolverKind};
use ato_core::model::Spectral;
use ato_core::oracle::{self, FiniteDifferenceOracle, LogisticOracle, QuarticOracle, SmoothOracle};
use ato_core::trace::NullSink;
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: ato_core::Error) -> PyErr {
    match e {
        ato_core::Error::Io(e) => PyOSError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a square matrix given as a list of rows"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Logistic-regression data; an intercept column is prepended to the features.
#[pyclass(module = "ato", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Dataset {
    inner: oracle::Dataset,
}

#[pymethods]
impl Dataset {
    #[new]
    fn new(rows: Vec<Vec<f64>>, labels: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: oracle::Dataset::from_rows(&rows, &labels).map_err(to_py)? })
    }

    #[getter]
    fn samples(&self) -> usize {
        self.inner.samples()
    }

    /// Parameter dimension, intercept included.
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(samples={}, dim={})", self.inner.samples(), self.inner.dim())
    }
}

#[pyfunction]
#[pyo3(signature = (path, has_header = false))]
fn load_dataset(path: std::path::PathBuf, has_header: bool) -> PyResult<Dataset> {
    Ok(Dataset { inner: harness::load_dataset(path, has_header).map_err(to_py)? })
}

/// A smooth convex objective with exact derivatives up to third order.
#[pyclass(module = "ato", frozen)]
struct Oracle {
    inner: Arc<dyn SmoothOracle>,
    label: String,
}

impl Oracle {
    fn vector(&self, x: Vec<f64>) -> PyResult<DVector<f64>> {
        if x.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!("expected length {}, got {}", self.inner.dim(), x.len())));
        }
        Ok(DVector::from_vec(x))
    }
}

#[pymethods]
impl Oracle {
    #[staticmethod]
    fn logistic(dataset: &Dataset) -> Self {
        let label = format!("logistic(samples={}, dim={})", dataset.inner.samples(), dataset.inner.dim());
        Self { inner: Arc::new(LogisticOracle::new(dataset.inner.clone())), label }
    }

    /// `f(x) = sum x_i^4`.
    #[staticmethod]
    fn quartic(n: usize) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(QuarticOracle::new(n).map_err(to_py)?), label: format!("quartic(n={n})") })
    }

    /// Same objective, third derivatives replaced by gradient differences with step `tau`.
    fn with_finite_differences(&self, tau: f64) -> PyResult<Self> {
        let fd = FiniteDifferenceOracle::new(self.inner.clone(), tau).map_err(to_py)?;
        Ok(Self { inner: Arc::new(fd), label: format!("{}, fd(tau={tau:e})", self.label) })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.value(&self.vector(x)?).map_err(to_py)
    }

    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.gradient(&self.vector(x)?).map_err(to_py)?.data.into())
    }

    fn hessian(&self, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.inner.hessian(&self.vector(x)?).map_err(to_py)?))
    }

    /// `D3f(x)[h]^2`.
    fn third_directional(&self, x: Vec<f64>, h: Vec<f64>) -> PyResult<Vec<f64>> {
        let (x, h) = (self.vector(x)?, self.vector(h)?);
        Ok(self.inner.third_directional(&x, &h).map_err(to_py)?.data.into())
    }

    fn hessian_trace(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.hessian_trace(&self.vector(x)?).map_err(to_py)
    }

    /// Oracle calls so far, per entry point.
    fn call_counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = self.inner.counters().snapshot();
        let d = PyDict::new(py);
        d.set_item("value", c.value)?;
        d.set_item("gradient", c.gradient)?;
        d.set_item("hessian", c.hessian)?;
        d.set_item("third_directional", c.third_directional)?;
        d.set_item("hessian_trace", c.hessian_trace)?;
        d.set_item("total", c.total())?;
        Ok(d)
    }

    /// Finite-difference check of the first three derivatives at `x`.
    #[pyo3(signature = (x, tol = 1e-5))]
    fn check_derivatives<'py>(&self, py: Python<'py>, x: Vec<f64>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let r = oracle::check_derivatives(self.inner.as_ref(), &self.vector(x)?, tol).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("gradient_err", r.gradient_err)?;
        d.set_item("hessian_err", r.hessian_err)?;
        d.set_item("third_err", r.third_err)?;
        d.set_item("passed", r.passed())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Oracle.{}", self.label)
    }
}

#[pyclass(module = "ato", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct RunReport {
    epsilon: f64,
    it: u64,
    co: u64,
    bgm_e: u64,
    bgm_it: u64,
    bgm_a: f64,
    final_grad_norm: f64,
    final_f: f64,
    wall_time_s: f64,
}

impl From<ato_core::RunReport> for RunReport {
    fn from(r: ato_core::RunReport) -> Self {
        Self {
            epsilon: r.epsilon,
            it: r.it,
            co: r.co,
            bgm_e: r.bgm_e,
            bgm_it: r.bgm_it,
            bgm_a: r.bgm_a,
            final_grad_norm: r.final_grad_norm,
            final_f: r.final_f,
            wall_time_s: r.wall_time_s,
        }
    }
}

#[pymethods]
impl RunReport {
    fn __repr__(&self) -> String {
        format!(
            "RunReport(epsilon={:e}, IT={}, CO={}, BGM_E={}, BGM_IT={}, BGM_A={:.4})",
            self.epsilon, self.it, self.co, self.bgm_e, self.bgm_it, self.bgm_a
        )
    }
}

#[pyclass(module = "ato", frozen, get_all)]
struct RunOutcome {
    solution: Vec<f64>,
    report: RunReport,
    /// One of "converged", "outer_cap", "inner_cap".
    status: &'static str,
}

#[pymethods]
impl RunOutcome {
    #[getter]
    fn converged(&self) -> bool {
        self.status == "converged"
    }
}

#[pyfunction]
#[pyo3(signature = (oracle, epsilon, solver = "basic", x0 = None, m0 = 1.0, max_outer = 100_000, max_inner = 10_000))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    oracle: &Oracle,
    epsilon: f64,
    solver: &str,
    x0: Option<Vec<f64>>,
    m0: f64,
    max_outer: usize,
    max_inner: usize,
) -> PyResult<RunOutcome> {
    let kind = match solver {
        "basic" => SolverKind::Basic,
        "accel" => SolverKind::Accel,
        other => return Err(PyValueError::new_err(format!("solver must be 'basic' or 'accel', got {other:?}"))),
    };
    let x0 = match x0 {
        Some(x) => oracle.vector(x)?,
        None => DVector::from_element(oracle.inner.dim(), 1.0),
    };
    let cfg = SolverConfig { m0, epsilon, max_outer, max_inner, secular_tol: 1e-12 };
    let inner = oracle.inner.clone();
    let out = py.detach(move || harness::solve(inner.as_ref(), kind, &x0, &cfg, &mut NullSink)).map_err(to_py)?;
    let status = match out.status {
        ato_core::RunStatus::Converged => "converged",
        ato_core::RunStatus::OuterCapReached => "outer_cap",
        ato_core::RunStatus::InnerCapReached => "inner_cap",
    };
    Ok(RunOutcome { solution: out.solution.data.into(), report: out.report.into(), status })
}

/// Solves `(H + (M/2) ||h||^2 I) h = c` for positive semidefinite `H`.
#[pyfunction]
#[pyo3(signature = (hessian, m, c, tol = 1e-12))]
fn secular_solve(hessian: Vec<Vec<f64>>, m: f64, c: Vec<f64>, tol: f64) -> PyResult<Vec<f64>> {
    let h = matrix(&hessian)?;
    if c.len() != h.nrows() {
        return Err(PyValueError::new_err("c and hessian dimensions differ"));
    }
    let s = Spectral::new(&h).map_err(to_py)?;
    Ok(ato_core::inner::secular_solve(&s, m, &DVector::from_vec(c), tol).map_err(to_py)?.data.into())
}

/// Positive root `a` of `a^4 = 16 (A + a)^3 / (18^3 M)`.
#[pyfunction]
#[pyo3(signature = (big_a, m_level, tol = 1e-12))]
fn solve_a(big_a: f64, m_level: f64, tol: f64) -> PyResult<f64> {
    ato_core::accel::solve_a(big_a, m_level, tol).map_err(to_py)
}

#[pymodule]
fn ato(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<Oracle>()?;
    m.add_class::<RunReport>()?;
    m.add_class::<RunOutcome>()?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(secular_solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_a, m)?)?;
    Ok(())
}
