mod common;

use std::io::Write;

use ato_core::harness::{
    emit_report, read_csv_reports, run_experiment, run_sweep, Problem, ReportFormat, RunConfig, SolverKind, StartPoint,
};
use ato_core::oracle::{LogisticOracle, QuarticOracle, SmoothOracle};
use ato_core::trace::NullSink;
use ato_core::{RunReport, RunStatus};

use common::{random_dataset, rng, Tally};

const SWEEP: [f64; 4] = [1e-2, 1e-4, 1e-6, 1e-8];

fn write_dataset(rows: usize, features: usize, seed: u64) -> tempfile::NamedTempFile {
    let mut r = rng(seed);
    let data = random_dataset(&mut r, rows, features);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    for (row, label) in data.features().row_iter().zip(data.labels().iter()) {
        let cols: Vec<String> = row.iter().skip(1).map(|v| format!("{v:e}")).collect();
        writeln!(file, "{},{}", cols.join(","), *label as u8).unwrap();
    }
    file.flush().unwrap();
    file
}

fn strip_time(mut r: RunReport) -> RunReport {
    r.wall_time_s = 0.0;
    r
}

fn assert_sweep_monotone(reports: &[RunReport]) {
    for w in reports.windows(2) {
        assert!(w[1].it >= w[0].it, "IT {} -> {}", w[0].it, w[1].it);
        assert!(w[1].bgm_it >= w[0].bgm_it, "BGM_IT {} -> {}", w[0].bgm_it, w[1].bgm_it);
    }
}

#[test]
fn quartic_sweeps_converge_monotonically() {
    for solver in [SolverKind::Basic, SolverKind::Accel] {
        let cfg = RunConfig::new(Problem::Quartic { n: 2 }, solver, SWEEP.to_vec());
        let entries = run_experiment(&cfg).unwrap();
        assert_eq!(entries.len(), 4);
        for (e, eps) in entries.iter().zip(SWEEP) {
            assert_eq!(e.status, RunStatus::Converged);
            assert_eq!(e.report.epsilon, eps);
            assert!(e.report.final_grad_norm <= eps);
        }
        let reports: Vec<RunReport> = entries.into_iter().map(|e| e.report).collect();
        assert_sweep_monotone(&reports);
    }
}

#[test]
fn logistic_sweep_is_monotone_and_deterministic() {
    let file = write_dataset(60, 3, 41);
    for solver in [SolverKind::Basic, SolverKind::Accel] {
        let problem = Problem::Logistic { dataset: file.path().to_path_buf(), has_header: false };
        let cfg = RunConfig::new(problem, solver, vec![1e-2, 1e-4, 1e-6]);
        let a: Vec<RunReport> = run_experiment(&cfg).unwrap().into_iter().map(|e| strip_time(e.report)).collect();
        let b: Vec<RunReport> = run_experiment(&cfg).unwrap().into_iter().map(|e| strip_time(e.report)).collect();
        assert_eq!(a, b);
        assert_sweep_monotone(&a);
    }
}

#[test]
fn small_logistic_average_inner_work_is_moderate() {
    let file = write_dataset(20, 3, 42);
    let problem = Problem::Logistic { dataset: file.path().to_path_buf(), has_header: false };
    let entries = run_experiment(&RunConfig::new(problem, SolverKind::Basic, vec![1e-6])).unwrap();
    let r = &entries[0].report;
    assert_eq!(entries[0].status, RunStatus::Converged);
    assert!((1.0..=30.0).contains(&r.bgm_a), "BGM_A = {}", r.bgm_a);
}

#[test]
fn sweep_oracle_calls_are_conserved() {
    let mut r = rng(43);
    let oracles: Vec<Tally<Box<dyn SmoothOracle>>> = vec![
        Tally::new(Box::new(QuarticOracle::new(3).unwrap())),
        Tally::new(Box::new(LogisticOracle::new(random_dataset(&mut r, 25, 3)))),
    ];
    for o in &oracles {
        for solver in [SolverKind::Basic, SolverKind::Accel] {
            let before = o.calls();
            let cfg = RunConfig::new(Problem::Quartic { n: o.dim() }, solver, vec![1e-2, 1e-5]);
            let entries = run_sweep(o, &cfg, &mut NullSink).unwrap();
            let co: u64 = entries.iter().map(|e| e.report.co).sum();
            assert_eq!(co, o.calls() - before);
            assert_eq!(o.calls(), o.counters().snapshot().total());
        }
    }
}

#[test]
fn zero_start_and_fd_mode_run_through_config() {
    let mut cfg = RunConfig::new(Problem::Quartic { n: 3 }, SolverKind::Basic, vec![1e-6]);
    cfg.x0 = StartPoint::Zeros;
    let e = run_experiment(&cfg).unwrap();
    assert_eq!(e[0].report.it, 0);
    assert_eq!(e[0].report.final_grad_norm, 0.0);

    cfg.x0 = StartPoint::Explicit(vec![1.0, -0.5, 0.25]);
    cfg.fd_tau = Some(1e-4);
    let e = run_experiment(&cfg).unwrap();
    assert_eq!(e[0].status, RunStatus::Converged);
    assert!(e[0].report.final_grad_norm <= 1e-6);
}

#[test]
fn trace_file_holds_one_line_per_record() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.jsonl");
    let mut cfg = RunConfig::new(Problem::Quartic { n: 2 }, SolverKind::Accel, vec![1e-3]);
    cfg.trace = Some(path.clone());
    let e = run_experiment(&cfg).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let kinds: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["kind"].as_str().unwrap().to_owned())
        .collect();
    let outer = kinds.iter().filter(|k| *k == "outer").count() as u64;
    let inner = kinds.iter().filter(|k| *k == "inner").count() as u64;
    assert_eq!(outer, e[0].report.bgm_e);
    assert_eq!(inner, e[0].report.bgm_it);
}

#[test]
fn report_formats_agree() {
    let cfg = RunConfig::new(Problem::Quartic { n: 2 }, SolverKind::Basic, SWEEP.to_vec());
    let reports: Vec<RunReport> = run_experiment(&cfg).unwrap().into_iter().map(|e| e.report).collect();
    let mut csv = Vec::new();
    emit_report(&reports, ReportFormat::Csv, &mut csv).unwrap();
    // wall time is written with microsecond resolution
    let stripped: Vec<RunReport> = reports.iter().cloned().map(strip_time).collect();
    let back = read_csv_reports(csv.as_slice()).unwrap();
    assert_eq!(back.into_iter().map(strip_time).collect::<Vec<_>>(), stripped);

    let mut jsonl = Vec::new();
    emit_report(&reports, ReportFormat::JsonLines, &mut jsonl).unwrap();
    let parsed: Vec<RunReport> =
        String::from_utf8(jsonl).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(parsed.into_iter().map(strip_time).collect::<Vec<_>>(), stripped);

    let mut table = Vec::new();
    emit_report(&reports, ReportFormat::Table, &mut table).unwrap();
    assert_eq!(String::from_utf8(table).unwrap().lines().count(), reports.len() + 1 + 1);
}
