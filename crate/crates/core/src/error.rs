use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("Hessian is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NonConvex { eigenvalue: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("scalar root search did not converge in {iterations} iterations ({what})")]
    RootSearch { what: &'static str, iterations: usize },

    #[error("regularization level overflowed at M = {level:e}")]
    LevelOverflow { level: f64 },

    #[error("dataset error at row {row}: {msg}")]
    Dataset { row: usize, msg: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("nothing to report")]
    EmptyReports,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("run at epsilon {epsilon:e} failed: {source}")]
    Run {
        epsilon: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}
