//! `shuttle` — noise-sensitivity sweeps for lattice transport.
//!
//! Exit codes: `0` success, `2` configuration/parse/I-O errors (including
//! clap usage errors), `3` a verification check failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shuttle_core::{Error, Result};

use shuttle_cli::config::RunConfig;
use shuttle_cli::extrema::report_extrema;
use shuttle_cli::sweep::run_sweep;
use shuttle_cli::verifysuite::run_verification;

#[derive(Parser)]
#[command(
    name = "shuttle",
    version,
    about = "Design lattice-transport ramps and sweep their noise sensitivities"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep sensitivities over the configured grid; write CSV + JSON record.
    Run {
        /// Path to a `key = value` configuration file.
        config: PathBuf,
    },
    /// Report characteristic times and slope ratios (white noise).
    Extrema {
        /// Path to a `key = value` configuration file.
        config: PathBuf,
    },
    /// Statistically verify quadrature vs. Monte-Carlo and lambda^2 scaling.
    Verify {
        /// Path to a `key = value` configuration file.
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    configure_workers();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Honors `SHUTTLE_WORKERS` (a positive thread count) for the global
/// thread pool; silently keeps the default on any problem, because a
/// worker-count preference should never fail a run.
fn configure_workers() {
    if let Ok(v) = std::env::var("SHUTTLE_WORKERS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Run { config } => {
            let (cfg, text) = RunConfig::from_path(&config)?;
            let csv_path = cfg.output_csv.clone().ok_or_else(|| {
                Error::InvalidConfig("run needs output_csv in the configuration".into())
            })?;
            let record_path = cfg.output_record.clone().ok_or_else(|| {
                Error::InvalidConfig("run needs output_record in the configuration".into())
            })?;
            let out = run_sweep(&cfg, &text)?;
            write_text(&csv_path, &out.csv)?;
            write_text(&record_path, &out.record.to_json())?;
            let flagged = out.rows.iter().filter(|r| r.flagged).count();
            println!(
                "wrote {} rows to {} (record: {}); {} flagged",
                out.rows.len(),
                csv_path.display(),
                record_path.display(),
                flagged
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Extrema { config } => {
            let (cfg, _) = RunConfig::from_path(&config)?;
            let summary = report_extrema(&cfg)?;
            print!("{summary}");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { config } => {
            let (cfg, _) = RunConfig::from_path(&config)?;
            let report = run_verification(&cfg)?;
            print!("{report}");
            if report.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}
