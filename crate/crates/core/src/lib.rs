//! Adaptive third-order tensor methods for composite convex minimization
//! `min f(x) + psi(x)`.
//!
//! Each outer step minimizes the quartic-regularized third-order Taylor model
//! of `f` with a Bregman gradient method ([`inner`]). The inner method detects
//! when the regularization level is too small to guarantee fast convergence
//! and reports it, and the outer loops ([`basic`], [`accel`]) respond by
//! doubling the level. No Lipschitz constant has to be known in advance.
//!
//! ```
//! use ato_core::{basic::{run_basic, SolverConfig}, oracle::{CompositeTerm, QuarticOracle}, trace::NullSink};
//! use nalgebra::DVector;
//!
//! let f = QuarticOracle::new(3).unwrap();
//! let x0 = DVector::from_element(3, 1.0);
//! let out = run_basic(&f, &CompositeTerm::Zero, &x0, &SolverConfig::new(1e-8), &mut NullSink).unwrap();
//! assert!(out.report.final_grad_norm <= 1e-8);
//! ```

pub mod accel;
pub mod basic;
pub mod error;
pub mod harness;
pub mod inner;
pub mod model;
pub mod oracle;
pub mod report;
pub mod trace;

pub use error::{Error, Result};
pub use report::{RunOutcome, RunReport, RunStatus};
