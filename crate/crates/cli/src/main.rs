use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use ato_core::harness::{emit_report, run_experiment, Problem, ReportFormat, RunConfig, SolverKind, StartPoint};
use ato_core::{RunReport, RunStatus};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ato", version, about = "Adaptive third-order methods for smooth convex minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver over one or more target accuracies and print the report.
    Solve(SolveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Logistic,
    Quartic,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Basic,
    Accel,
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    Ones,
    Zeros,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Jsonl,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    /// CSV file, one sample per row, label last (logistic only).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// The dataset file starts with a header row.
    #[arg(long)]
    has_header: bool,
    /// Dimension of the quartic problem.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    solver: SolverArg,
    /// Comma-separated gradient-norm targets, e.g. 1e-2,1e-4.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    m0: f64,
    #[arg(long, value_enum, default_value_t = StartArg::Ones)]
    x0: StartArg,
    /// Replace third derivatives by finite differences of the gradient with this step.
    #[arg(long)]
    fd_tau: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    max_outer: usize,
    #[arg(long, default_value_t = 10_000)]
    max_inner: usize,
    /// Write a JSON-lines trace of every inner and outer iteration here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SolveArgs {
    fn config(&self) -> Result<RunConfig, String> {
        let problem = match self.problem {
            ProblemArg::Logistic => {
                let dataset = self.dataset.clone().ok_or("--problem logistic requires --dataset")?;
                if self.n.is_some() {
                    return Err("--n applies to --problem quartic only".into());
                }
                Problem::Logistic { dataset, has_header: self.has_header }
            }
            ProblemArg::Quartic => {
                if self.dataset.is_some() || self.has_header {
                    return Err("--dataset and --has-header apply to --problem logistic only".into());
                }
                Problem::Quartic { n: self.n.ok_or("--problem quartic requires --n")? }
            }
        };
        let solver = match self.solver {
            SolverArg::Basic => SolverKind::Basic,
            SolverArg::Accel => SolverKind::Accel,
        };
        let mut cfg = RunConfig::new(problem, solver, self.eps.clone());
        cfg.m0 = self.m0;
        cfg.x0 = match self.x0 {
            StartArg::Ones => StartPoint::Ones,
            StartArg::Zeros => StartPoint::Zeros,
        };
        cfg.fd_tau = self.fd_tau;
        cfg.max_outer = self.max_outer;
        cfg.max_inner = self.max_inner;
        cfg.trace = self.trace.clone();
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn format(&self) -> ReportFormat {
        match self.format {
            FormatArg::Table => ReportFormat::Table,
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Jsonl => ReportFormat::JsonLines,
        }
    }
}

fn solve(args: &SolveArgs) -> Result<ExitCode, String> {
    let cfg = args.config()?;
    let entries = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let reports: Vec<RunReport> = entries.iter().map(|e| e.report.clone()).collect();
    let out: Box<dyn Write> = match &args.out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?))
        }
        None => Box::new(io::stdout().lock()),
    };
    emit_report(&reports, args.format(), out).map_err(|e| e.to_string())?;

    let capped: Vec<String> = entries
        .iter()
        .filter(|e| e.status != RunStatus::Converged)
        .map(|e| format!("{:e} ({:?})", e.report.epsilon, e.status))
        .collect();
    if capped.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: iteration cap reached for eps {}", capped.join(", "));
        Ok(ExitCode::from(2))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Solve(args) => solve(args),
    };
    result.unwrap_or_else(|msg| {
        eprintln!("error: {msg}");
        ExitCode::FAILURE
    })
}
