//! Experiment driver behind the `coco-lab` binary: reads a JSON config, runs
//! every `(learner, T, seed)` cell, writes per-run artifacts or a sweep
//! table, and re-checks stored runs.

mod config;
mod fit;
pub mod io;

pub use config::{default_t_grid, ExperimentConfig, Overrides, ToleranceOverrides};
pub use fit::{fit_slope, median, SlopeFit, LOG_FLOOR};

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{run_observed, LearnerConfig, LearnerKind, RunError, Trace};
use crate::certificates::{
    check_aggregates, check_trace, offline_benchmark_with, CertError, CertificateReport, RegretReport,
};
use crate::instances::{Instance, InstanceError};
use crate::tolerance::Tolerances;
use io::RunSummary;

/// Exit status when every CocoOGD certificate passes.
pub const EXIT_PASS: i32 = 0;
/// Exit status when a certificate fails.
pub const EXIT_CERT_FAIL: i32 = 1;
/// Exit status for configuration, I/O and format errors.
pub const EXIT_ERROR: i32 = 2;

/// Allowed ccv slope for the bounded-CCV conjecture: `1/3 + 0.05`.
pub const CONJECTURE_SLOPE: f64 = 1.0 / 3.0 + 0.05;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("bad stored data: {0}")]
    Format(String),
    #[error("slope fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Cert(#[from] CertError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, source: csv::Error) -> Self {
        HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One `(learner, T, seed)` combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub learner: LearnerKind,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seed: u64,
}

impl Cell {
    /// Directory name under `runs/`.
    pub fn dir_name(&self, generator: &str) -> String {
        format!("{generator}_{}_T{}_s{}", self.learner.name(), self.horizon, self.seed)
    }
}

/// Cells in learner, horizon, seed order.
pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &learner in &config.learners {
        for &horizon in &config.t_grid {
            for &seed in &config.seeds {
                out.push(Cell { learner, horizon, seed });
            }
        }
    }
    out
}

pub struct CellOutcome {
    pub cell: Cell,
    pub instance: Instance,
    pub trace: Trace,
    pub tolerances: Tolerances,
    pub certificate: CertificateReport,
    pub regret: RegretReport,
    pub wallclock_ms: f64,
}

/// Generates the instance, runs the learner and evaluates certificates and
/// regret.
pub fn run_cell(config: &ExperimentConfig, cell: Cell) -> Result<CellOutcome, HarnessError> {
    let start = Instant::now();
    let instance = config
        .generator
        .generate(cell.horizon, &config.domain, config.lipschitz, cell.seed)?;
    let tolerances = config.tolerances(instance.diameter);
    let cfg = LearnerConfig::for_instance(&instance);
    let trace = run_observed(cell.learner, &cfg, &instance, &tolerances, |_, _, _| {})?;
    let certificate = check_trace(&trace, &tolerances);
    let regret = offline_benchmark_with(&instance, &trace, &config.offline)?;
    Ok(CellOutcome {
        cell,
        instance,
        trace,
        tolerances,
        certificate,
        regret,
        wallclock_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(1).max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))
}

/// An entry of `failures.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub run: String,
    pub kind: FailureKind,
    pub detail: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// A CocoOGD certificate check failed.
    Certificate,
    /// The run could not be completed or read back.
    Error,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FailureManifest {
    pub failures: Vec<Failure>,
}

impl FailureManifest {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_PASS
        } else if self.failures.iter().any(|f| f.kind == FailureKind::Error) {
            EXIT_ERROR
        } else {
            EXIT_CERT_FAIL
        }
    }
}

fn certificate_failure(run: String, learner: LearnerKind, cert: &CertificateReport) -> Option<Failure> {
    (learner == LearnerKind::CocoOgd && !cert.all_pass()).then(|| Failure {
        run,
        kind: FailureKind::Certificate,
        detail: cert.failures().iter().map(|s| s.to_string()).collect(),
    })
}

fn error_failure(run: String, err: &HarnessError) -> Failure {
    Failure {
        run,
        kind: FailureKind::Error,
        detail: vec![err.to_string()],
    }
}

fn write_manifest(dir: &Path, manifest: &FailureManifest) -> Result<(), HarnessError> {
    let path = dir.join(io::FAILURES_FILE);
    if manifest.failures.is_empty() {
        match std::fs::remove_file(&path) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
            Err(e) => Err(HarnessError::io(&path, e)),
        }
    } else {
        io::write_json(&path, manifest)
    }
}

fn write_run(dir: &Path, config: &ExperimentConfig, out: &CellOutcome) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    io::write_trace_csv(&dir.join(io::TRACE_FILE), &out.trace.steps)?;
    io::write_json(&dir.join(io::CERTIFICATE_FILE), &out.certificate)?;
    io::write_json(&dir.join(io::REGRET_FILE), &out.regret)?;
    let summary = RunSummary {
        header: out.trace.header.clone(),
        measures: out.trace.measures,
        final_set: out.trace.final_set.clone(),
        tolerances: out.tolerances,
        instance: out.instance.to_json(false)?,
        config: config.clone(),
    };
    io::write_json(&dir.join(io::SUMMARY_FILE), &summary)
}

/// Result of `run` or `verify`.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    /// Run directories in cell order.
    pub runs: Vec<PathBuf>,
    pub manifest: FailureManifest,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.manifest.exit_code()
    }
}

/// Runs every cell and writes `runs/<cell>/{trace.csv, certificate.json,
/// regret.json, summary.json}` under the output directory, plus
/// `failures.json` when something fails.
pub fn cmd_run(config: &ExperimentConfig, jobs: Option<usize>) -> Result<RunReport, HarnessError> {
    config.validate(false)?;
    let root = &config.output_dir;
    let runs_dir = root.join("runs");
    std::fs::create_dir_all(&runs_dir).map_err(|e| HarnessError::io(&runs_dir, e))?;
    let generator = config.generator.name();
    let cells = cells(config);
    let results: Vec<(PathBuf, Option<Failure>)> = pool(jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&cell| {
                let name = cell.dir_name(generator);
                let dir = runs_dir.join(&name);
                let failure = match run_cell(config, cell).and_then(|out| {
                    write_run(&dir, config, &out)?;
                    Ok(out.certificate)
                }) {
                    Ok(cert) => certificate_failure(name, cell.learner, &cert),
                    Err(e) => Some(error_failure(name, &e)),
                };
                (dir, failure)
            })
            .collect()
    });
    let mut report = RunReport::default();
    for (dir, failure) in results {
        report.runs.push(dir);
        report.manifest.failures.extend(failure);
    }
    write_manifest(root, &report.manifest)?;
    Ok(report)
}

/// A row of `sweep.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub generator: String,
    pub learner: LearnerKind,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seed: u64,
    pub regret: f64,
    pub ccv: f64,
    pub bound_ccv: f64,
    pub pass: bool,
    pub wallclock_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerFit {
    pub learner: LearnerKind,
    /// `(T, median over seeds)`.
    pub regret_points: Vec<(usize, f64)>,
    pub ccv_points: Vec<(usize, f64)>,
    pub regret_fit: SlopeFit,
    pub ccv_fit: SlopeFit,
    /// Whether `ccv_slope <= 1/3 + 0.05`; recorded, not enforced.
    pub ccv_slope_within_conjecture: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub generator: String,
    pub config: ExperimentConfig,
    pub fits: Vec<LearnerFit>,
    pub rows: Vec<SweepRow>,
    pub manifest: FailureManifest,
}

impl SweepResult {
    pub fn fit_for(&self, learner: LearnerKind) -> Option<&LearnerFit> {
        self.fits.iter().find(|f| f.learner == learner)
    }

    pub fn exit_code(&self) -> i32 {
        self.manifest.exit_code()
    }
}

/// Per-learner slope fits of median regret and CCV against `T`.
pub fn fit_rows(rows: &[SweepRow], learners: &[LearnerKind], t_grid: &[usize]) -> Result<Vec<LearnerFit>, HarnessError> {
    let mut fits = Vec::new();
    for &learner in learners {
        let mut regret_points = Vec::new();
        let mut ccv_points = Vec::new();
        for &t in t_grid {
            let cell: Vec<&SweepRow> = rows.iter().filter(|r| r.learner == learner && r.horizon == t).collect();
            if cell.is_empty() {
                continue;
            }
            regret_points.push((t, median(&cell.iter().map(|r| r.regret).collect::<Vec<_>>())));
            ccv_points.push((t, median(&cell.iter().map(|r| r.ccv).collect::<Vec<_>>())));
        }
        let as_f = |pts: &[(usize, f64)]| pts.iter().map(|&(t, v)| (t as f64, v)).collect::<Vec<_>>();
        let regret_fit = fit_slope(&as_f(&regret_points))?;
        let ccv_fit = fit_slope(&as_f(&ccv_points))?;
        fits.push(LearnerFit {
            learner,
            ccv_slope_within_conjecture: ccv_fit.slope <= CONJECTURE_SLOPE,
            regret_points,
            ccv_points,
            regret_fit,
            ccv_fit,
        });
    }
    Ok(fits)
}

pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_JSON: &str = "sweep.json";

/// Runs the grid without per-run artifacts, fits slopes, and writes
/// `sweep.csv` and `sweep.json`.
pub fn cmd_sweep(config: &ExperimentConfig, jobs: Option<usize>) -> Result<SweepResult, HarnessError> {
    config.validate(true)?;
    let generator = config.generator.name().to_string();
    let cells = cells(config);
    let outcomes: Vec<Result<SweepRow, (Cell, HarnessError)>> = pool(jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&cell| {
                let out = run_cell(config, cell).map_err(|e| (cell, e))?;
                Ok(SweepRow {
                    generator: generator.clone(),
                    learner: cell.learner,
                    horizon: cell.horizon,
                    seed: cell.seed,
                    regret: out.regret.regret,
                    ccv: out.regret.ccv,
                    bound_ccv: out.regret.bound_ccv,
                    pass: out.certificate.all_pass(),
                    wallclock_ms: out.wallclock_ms,
                })
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut manifest = FailureManifest::default();
    for o in outcomes {
        match o {
            Ok(row) => {
                if row.learner == LearnerKind::CocoOgd && !row.pass {
                    manifest.failures.push(Failure {
                        run: Cell {
                            learner: row.learner,
                            horizon: row.horizon,
                            seed: row.seed,
                        }
                        .dir_name(&generator),
                        kind: FailureKind::Certificate,
                        detail: vec!["certificate flags failed".into()],
                    });
                }
                rows.push(row);
            }
            Err((cell, e)) => manifest.failures.push(error_failure(cell.dir_name(&generator), &e)),
        }
    }
    let fits = if manifest.failures.iter().any(|f| f.kind == FailureKind::Error) {
        Vec::new()
    } else {
        fit_rows(&rows, &config.learners, &config.t_grid)?
    };
    let result = SweepResult {
        generator,
        config: config.clone(),
        fits,
        rows,
        manifest,
    };
    write_sweep(&config.output_dir, &result)?;
    Ok(result)
}

fn write_sweep(root: &Path, result: &SweepResult) -> Result<(), HarnessError> {
    std::fs::create_dir_all(root).map_err(|e| HarnessError::io(root, e))?;
    let path = root.join(SWEEP_CSV);
    let mut w = csv::Writer::from_path(&path).map_err(|e| HarnessError::csv(&path, e))?;
    for row in &result.rows {
        w.serialize(row).map_err(|e| HarnessError::csv(&path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(&path, e))?;
    io::write_json(&root.join(SWEEP_JSON), result)?;
    write_manifest(root, &result.manifest)
}

/// Run directories below `path`: the directory itself when it holds a
/// summary, otherwise every subdirectory of `path/runs` in name order.
pub fn discover_runs(path: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    if path.join(io::SUMMARY_FILE).exists() {
        return Ok(vec![path.to_path_buf()]);
    }
    let runs = path.join("runs");
    let entries = std::fs::read_dir(&runs).map_err(|e| HarnessError::io(&runs, e))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| HarnessError::io(&runs, e))?;
        if entry.path().is_dir() {
            dirs.push(entry.path());
        }
    }
    dirs.sort();
    if dirs.is_empty() {
        return Err(HarnessError::Format(format!("no runs found under {}", runs.display())));
    }
    Ok(dirs)
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Re-checks one stored run from its CSV and JSON files, using the recorded
/// tolerances unless `COCO_LAB_TOL` is set.
pub fn verify_run(dir: &Path) -> Result<(LearnerKind, CertificateReport), HarnessError> {
    for f in [io::TRACE_FILE, io::CERTIFICATE_FILE, io::REGRET_FILE, io::SUMMARY_FILE] {
        let p = dir.join(f);
        if !p.is_file() {
            return Err(HarnessError::Format(format!("missing {}", p.display())));
        }
    }
    let (trace, summary) = io::load_trace(dir)?;
    let cfg = &trace.header.cfg;
    let tol = match std::env::var(crate::tolerance::TOL_ENV) {
        Ok(_) => Tolerances::from_env(cfg.diameter),
        Err(_) => summary.tolerances,
    };
    let report = check_aggregates(&trace.steps, &trace.measures, cfg.diameter, cfg.lipschitz, 2.0 / cfg.diameter, &tol);

    let stored: CertificateReport = io::read_json(&dir.join(io::CERTIFICATE_FILE))?;
    if stored.all_pass() != report.all_pass() {
        return Err(HarnessError::Format(format!(
            "{}: stored certificate disagrees with the trace",
            dir.display()
        )));
    }
    let instance = Instance::from_json(&summary.instance)?;
    let regret = offline_benchmark_with(&instance, &trace, &summary.config.offline)?;
    let stored: RegretReport = io::read_json(&dir.join(io::REGRET_FILE))?;
    if !(close(stored.regret, regret.regret) && close(stored.ccv, regret.ccv) && close(stored.offline_cost, regret.offline_cost))
    {
        return Err(HarnessError::Format(format!(
            "{}: stored regret disagrees with the trace",
            dir.display()
        )));
    }
    Ok((summary.header.learner, report))
}

/// Re-checks every run under `path` without re-simulating. Exit status
/// follows `run`: only CocoOGD certificates count.
pub fn cmd_verify(path: &Path) -> Result<RunReport, HarnessError> {
    let runs = discover_runs(path)?;
    let mut report = RunReport::default();
    for dir in runs {
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let failure = match verify_run(&dir) {
            Ok((learner, cert)) => certificate_failure(name, learner, &cert),
            Err(e) => Some(error_failure(name, &e)),
        };
        report.manifest.failures.extend(failure);
        report.runs.push(dir);
    }
    Ok(report)
}
