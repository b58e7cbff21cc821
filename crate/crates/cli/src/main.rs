//! `spin32`: verification suites, reductions and integrations of the spin-3/2
//! radial system, with JSON manifests for every run.
//!
//! Exit status: 0 success, 1 an invariant check failed, 2 usage error,
//! 3 numerical failure (a diagnostic manifest is still written).

mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;
use spin32_core::adjudication::adjudication_table;

use crate::args::Cli;
use crate::commands::Report;
use crate::error::CliError;
use crate::output::{Manifest, Output, Status, Versions};

fn run(cli: &Cli) -> Result<u8, CliError> {
    let cfg = config::resolve(cli)?;
    let mut out = Output::open(&cfg.out_dir)?;
    let manifest_name = format!("{}.manifest.json", cfg.task.stem());
    out.discard_previous(&manifest_name);
    let (status, report, error) = match commands::execute(&cfg, &mut out) {
        Ok(r) if r.checks.all_passed() => (Status::Ok, r, None),
        Ok(r) => (Status::ChecksFailed, r, None),
        Err(CliError::Numerical(msg)) => (Status::NumericalFailure, Report::default(), Some(msg)),
        Err(e) => return Err(e),
    };
    let adjudication = adjudication_table(cfg.seed).map_err(CliError::from)?;
    for c in report.checks.failures() {
        eprintln!(
            "check failed: {} (residual {:.3e}, tol {:.1e})",
            c.name, c.residual, c.tolerance
        );
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(msg) = &error {
        eprintln!("numerical failure: {msg}");
    }
    let manifest = Manifest {
        versions: Versions::default(),
        inputs: cfg,
        status,
        warning: !report.warnings.is_empty(),
        warnings: report.warnings,
        error,
        checks: report.checks.checks,
        summary: report.summary,
        adjudication,
        files: Vec::new(),
    };
    let path = out.finish(&manifest_name, manifest)?;
    if let Some(text) = report.stdout {
        print!("{text}");
    }
    eprintln!("manifest: {}", path.display());
    Ok(match status {
        Status::Ok => 0,
        Status::ChecksFailed => 1,
        Status::NumericalFailure => 3,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
