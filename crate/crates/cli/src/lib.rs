//! Command-line front end: one subcommand per operation or experiment, each
//! writing a CSV table and a one-line summary.
//!
//! Exit codes: 0 success, 1 usage or verification failure, 2 exceptional
//! parameter (c ∈ ℰ, σ ∈ 𝒵, or a singular frequency), 3 unsolvable mode.
//! `CATTANEO_THREADS` sets the worker count; output does not depend on it.

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod output;
pub mod verify;

pub use args::Cli;
pub use output::{Report, Table};

pub const THREADS_ENV: &str = "CATTANEO_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] cattaneo_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cattaneo_core::Error as E;
        match self {
            CliError::Core(
                E::ExceptionalParameter { .. }
                | E::DegenerateMode { .. }
                | E::SingularParameter { .. }
                | E::DiscreteExceptional { .. }
                | E::Configuration(_),
            ) => 2,
            CliError::Core(E::UnsolvableMode { .. }) => 3,
            _ => 1,
        }
    }
}

/// Sizes the global worker pool from `CATTANEO_THREADS` (once per process).
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A second call in the same process finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    commands::dispatch(&cli.command)
}

/// Parses `argv`, runs the subcommand, writes the CSV and summary, and returns
/// the exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    let outcome = configure_threads().and_then(|()| {
        let report = execute(&cli)?;
        match &cli.out {
            Some(path) => report.table.write_csv(std::fs::File::create(path)?)?,
            None => report.table.write_csv(&mut *stdout)?,
        }
        let _ = writeln!(stderr, "{}", report.summary);
        match report.failure {
            Some(why) => Err(CliError::Verification(why)),
            None => Ok(()),
        }
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
