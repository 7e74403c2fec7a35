//! Experiment engine: dataset ingestion, epsilon sweeps and report output.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::accel::run_accel;
use crate::basic::{run_basic, SolverConfig};
use crate::error::{Error, Result};
use crate::oracle::{CompositeTerm, Dataset, FiniteDifferenceOracle, LogisticOracle, QuarticOracle, SmoothOracle};
use crate::report::{RunOutcome, RunReport, RunStatus};
use crate::trace::{JsonLinesSink, NullSink, TraceSink};

pub const CSV_HEADER: [&str; 9] =
    ["epsilon", "IT", "CO", "BGM_E", "BGM_IT", "BGM_A", "final_grad_norm", "final_f", "wall_time_s"];

/// Reads a headerless (unless `has_header`) CSV file whose last column is a
/// 0/1 label. The intercept column is prepended.
pub fn load_dataset(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let file = File::open(path.as_ref())?;
    read_dataset(file, has_header)
}

pub fn read_dataset<R: Read>(reader: R, has_header: bool) -> Result<Dataset> {
    let mut rdr =
        csv::ReaderBuilder::new().has_headers(has_header).trim(csv::Trim::All).flexible(true).from_reader(reader);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let offset = if has_header { 2 } else { 1 };
    for (idx, rec) in rdr.records().enumerate() {
        let row = idx + offset;
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::Dataset {
                row,
                msg: format!("need at least one feature and a label, found {} field(s)", rec.len()),
            });
        }
        let mut vals = Vec::with_capacity(rec.len());
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Dataset {
                row,
                msg: format!("column {}: cannot parse {field:?} as a number", col + 1),
            })?;
            vals.push(v);
        }
        let label = vals.pop().expect("at least two fields");
        if label != 0.0 && label != 1.0 {
            return Err(Error::Dataset { row, msg: format!("label must be 0 or 1, found {label}") });
        }
        if let Some(first) = rows.first().map(|r: &Vec<f64>| r.len()) {
            if vals.len() != first {
                return Err(Error::Dataset { row, msg: format!("expected {first} features, found {}", vals.len()) });
            }
        }
        rows.push(vals);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::from_rows(&rows, &labels).map_err(|e| match e {
        Error::Dataset { row, msg } => Error::Dataset { row: row + offset - 1, msg },
        other => other,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Problem {
    Logistic { dataset: PathBuf, has_header: bool },
    Quartic { n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    Basic,
    Accel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StartPoint {
    Ones,
    Zeros,
    Explicit(Vec<f64>),
}

impl StartPoint {
    pub fn materialize(&self, n: usize) -> Result<DVector<f64>> {
        match self {
            StartPoint::Ones => Ok(DVector::from_element(n, 1.0)),
            StartPoint::Zeros => Ok(DVector::zeros(n)),
            StartPoint::Explicit(v) if v.len() == n => Ok(DVector::from_column_slice(v)),
            StartPoint::Explicit(v) => Err(Error::DimensionMismatch { expected: n, got: v.len() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: Problem,
    pub solver: SolverKind,
    pub epsilons: Vec<f64>,
    pub m0: f64,
    pub x0: StartPoint,
    pub fd_tau: Option<f64>,
    pub max_outer: usize,
    pub max_inner: usize,
    pub trace: Option<PathBuf>,
    /// Seed for randomized checks; the solvers themselves draw no random numbers.
    pub seed: u64,
}

impl RunConfig {
    pub fn new(problem: Problem, solver: SolverKind, epsilons: Vec<f64>) -> Self {
        Self {
            problem,
            solver,
            epsilons,
            m0: 1.0,
            x0: StartPoint::Ones,
            fd_tau: None,
            max_outer: 100_000,
            max_inner: 10_000,
            trace: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::Config("at least one epsilon is required".into()));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!("epsilon must be positive, got {e}")));
        }
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(Error::Config(format!("M0 must be positive, got {}", self.m0)));
        }
        if let Some(t) = self.fd_tau {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("fd tau must be positive, got {t}")));
            }
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::Config("iteration caps must be positive".into()));
        }
        Ok(())
    }

    fn solver_config(&self, epsilon: f64) -> SolverConfig {
        SolverConfig { m0: self.m0, epsilon, max_outer: self.max_outer, max_inner: self.max_inner, secular_tol: 1e-12 }
    }
}

/// Runs one solver from `x0` on `oracle`.
pub fn solve<O: SmoothOracle + ?Sized>(
    oracle: &O,
    solver: SolverKind,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
    sink: &mut dyn TraceSink,
) -> Result<RunOutcome> {
    match solver {
        SolverKind::Basic => run_basic(oracle, &CompositeTerm::Zero, x0, cfg, sink),
        SolverKind::Accel => run_accel(oracle, &CompositeTerm::Zero, x0, cfg, sink),
    }
}

/// One sweep entry: the report plus how the run ended.
#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub report: RunReport,
    pub status: RunStatus,
}

/// Builds the configured problem and runs the selected solver once per
/// epsilon, each time from the configured start point.
pub fn run_experiment(cfg: &RunConfig) -> Result<Vec<SweepEntry>> {
    cfg.validate()?;
    let oracle: Box<dyn SmoothOracle> = match &cfg.problem {
        Problem::Logistic { dataset, has_header } => Box::new(LogisticOracle::new(load_dataset(dataset, *has_header)?)),
        Problem::Quartic { n } => Box::new(QuarticOracle::new(*n)?),
    };
    let oracle: Box<dyn SmoothOracle> = match cfg.fd_tau {
        Some(tau) => Box::new(FiniteDifferenceOracle::new(oracle, tau)?),
        None => oracle,
    };
    match &cfg.trace {
        Some(path) => {
            let mut sink = JsonLinesSink::new(BufWriter::new(File::create(path)?));
            let entries = run_sweep(oracle.as_ref(), cfg, &mut sink)?;
            sink.finish()?;
            Ok(entries)
        }
        None => run_sweep(oracle.as_ref(), cfg, &mut NullSink),
    }
}

pub fn run_sweep(oracle: &dyn SmoothOracle, cfg: &RunConfig, sink: &mut dyn TraceSink) -> Result<Vec<SweepEntry>> {
    cfg.validate()?;
    let x0 = cfg.x0.materialize(oracle.dim())?;
    let mut out = Vec::with_capacity(cfg.epsilons.len());
    for &epsilon in &cfg.epsilons {
        let outcome = solve(oracle, cfg.solver, &x0, &cfg.solver_config(epsilon), sink)
            .map_err(|e| Error::Run { epsilon, source: Box::new(e) })?;
        out.push(SweepEntry { report: outcome.report, status: outcome.status });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Table,
    Csv,
    JsonLines,
}

pub fn emit_report<W: Write>(reports: &[RunReport], format: ReportFormat, sink: W) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::EmptyReports);
    }
    match format {
        ReportFormat::Table => write_table(reports, sink),
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(CSV_HEADER)?;
            for r in reports {
                w.write_record(&[
                    format!("{:e}", r.epsilon),
                    r.it.to_string(),
                    r.co.to_string(),
                    r.bgm_e.to_string(),
                    r.bgm_it.to_string(),
                    format!("{:.4}", r.bgm_a),
                    format!("{:e}", r.final_grad_norm),
                    format!("{:e}", r.final_f),
                    format!("{:.6}", r.wall_time_s),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        ReportFormat::JsonLines => {
            let mut sink = sink;
            for r in reports {
                serde_json::to_writer(&mut sink, r)?;
                sink.write_all(b"\n")?;
            }
            sink.flush()?;
            Ok(())
        }
    }
}

fn write_table<W: Write>(reports: &[RunReport], mut out: W) -> Result<()> {
    writeln!(out, "{:>8} | {:>7} | {:>8} | {:>7} | {:>8} | {:>8}", "eps", "IT", "CO", "BGM-E", "BGM-IT", "BGM-A")?;
    writeln!(out, "{}", "-".repeat(61))?;
    for r in reports {
        writeln!(
            out,
            "{:>8.0e} | {:>7} | {:>8} | {:>7} | {:>8} | {:>8.4}",
            r.epsilon, r.it, r.co, r.bgm_e, r.bgm_it, r.bgm_a
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Parses the CSV written by [`emit_report`].
pub fn read_csv_reports<R: Read>(reader: R) -> Result<Vec<RunReport>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}
