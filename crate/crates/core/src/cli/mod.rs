//! Command-line front end: `run` drives the loop over a config's seeds and
//! `report` aggregates finished run directories.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 config error, 3 numeric failure.

pub mod report;
pub mod run;
pub mod store;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use log::error;

use crate::error::Error;
pub use report::{cmd_report, ReportMode};
pub use run::{cmd_run, RunOutcome};

pub const SEED_OFFSET_VAR: &str = "FRACGP_SEED_OFFSET";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fracgp", version, about = "Thompson sampling with a tempered GP posterior")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every seed of a config and write one trace per seed.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Aggregate run directories into a report.
    Report {
        #[arg(value_enum)]
        mode: ReportMode,
        run_dirs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Hyperparameter(_) | Error::Json(_) => EXIT_CONFIG,
        Error::Input(_) | Error::Numeric(_) | Error::Logic(_) => EXIT_NUMERIC,
        Error::Io { .. } => EXIT_IO,
    }
}

fn seed_offset() -> Result<i64, Error> {
    match std::env::var(SEED_OFFSET_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_OFFSET_VAR} must be an integer, got {v:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(Error::Config(format!("{SEED_OFFSET_VAR}: {e}"))),
    }
}

/// Runs a parsed command and maps the outcome to an exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Run {
            config,
            out,
            parallel,
        } => seed_offset()
            .and_then(|offset| cmd_run(&config, &out, parallel, offset))
            .and_then(|o| match o.failure {
                None => {
                    println!("{}", out.display());
                    Ok(())
                }
                Some(e) => Err(e),
            }),
        Command::Report { mode, run_dirs, out } => cmd_report(mode, &run_dirs, &out).map(|summary| {
            println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
        }),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            error!("{e}");
            eprintln!("fracgp: {e}");
            exit_code(&e)
        }
    }
}
