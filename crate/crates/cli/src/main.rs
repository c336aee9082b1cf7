use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coco_lab::harness::{self, ExperimentConfig, HarnessError, Overrides, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "coco-lab", version, about = "Constrained online convex optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON). `verify` also accepts an output or run directory.
    path: PathBuf,
    /// Output directory, replacing `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed_override: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (learner, T, seed) cell and write per-run artifacts.
    Run(Common),
    /// Run the grid and fit log-log slopes of regret and CCV.
    Sweep(Common),
    /// Re-check stored runs without re-simulating.
    Verify(Common),
}

fn load(args: &Common) -> Result<(ExperimentConfig, Option<usize>), HarnessError> {
    let mut cfg = ExperimentConfig::from_path(&args.path)?;
    cfg.apply(&Overrides {
        output_dir: args.out.clone(),
        seed: args.seed_override,
        jobs: args.jobs,
    });
    Ok((cfg, args.jobs))
}

fn verify_target(args: &Common) -> Result<PathBuf, HarnessError> {
    if args.path.is_dir() {
        return Ok(args.path.clone());
    }
    if let Some(out) = &args.out {
        return Ok(out.clone());
    }
    Ok(load(args)?.0.output_dir)
}

fn report_failures(root: &Path, manifest: &harness::FailureManifest) {
    for f in &manifest.failures {
        eprintln!("FAIL {} ({:?}): {}", f.run, f.kind, f.detail.join("; "));
    }
    if !manifest.failures.is_empty() {
        eprintln!("failure manifest: {}", root.join(harness::io::FAILURES_FILE).display());
    }
}

fn dispatch(cli: &Cli) -> Result<i32, HarnessError> {
    match &cli.command {
        Command::Run(args) => {
            let (cfg, jobs) = load(args)?;
            let report = harness::cmd_run(&cfg, jobs)?;
            println!("{} runs written to {}", report.runs.len(), cfg.output_dir.display());
            report_failures(&cfg.output_dir, &report.manifest);
            Ok(report.exit_code())
        }
        Command::Sweep(args) => {
            let (cfg, jobs) = load(args)?;
            let result = harness::cmd_sweep(&cfg, jobs)?;
            for fit in &result.fits {
                println!(
                    "{} {}: regret slope {:.4} (r2 {:.3}), ccv slope {:.4} (r2 {:.3}), ccv slope <= 1/3 + 0.05: {}",
                    result.generator,
                    fit.learner.name(),
                    fit.regret_fit.slope,
                    fit.regret_fit.r2,
                    fit.ccv_fit.slope,
                    fit.ccv_fit.r2,
                    fit.ccv_slope_within_conjecture
                );
            }
            report_failures(&cfg.output_dir, &result.manifest);
            Ok(result.exit_code())
        }
        Command::Verify(args) => {
            let target = verify_target(args)?;
            let report = harness::cmd_verify(&target)?;
            println!("{} runs verified under {}", report.runs.len(), target.display());
            for f in &report.manifest.failures {
                eprintln!("FAIL {} ({:?}): {}", f.run, f.kind, f.detail.join("; "));
            }
            Ok(report.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            let manifest = serde_json::json!({ "error": e.to_string() });
            eprintln!("{manifest}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
