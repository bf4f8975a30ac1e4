//! Command-line front end. `run` returns the process exit code:
//! 0 success, 1 internal error, 2 input parse error, 3 invalid configuration.

pub mod bench;
pub mod detect;
pub mod gen;
mod io;

use std::ffi::OsString;
use std::fmt;

use clap::{Parser, Subcommand};

pub use io::{read_series_csv, CsvOptions};

/// Version tag of every JSON document the CLI writes.
pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "LIGHTESD_SEED";

#[derive(Debug)]
pub enum CliError {
    Internal(String),
    Parse(String),
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Internal(m) => write!(f, "internal error: {m}"),
            CliError::Parse(m) => write!(f, "input error: {m}"),
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub(crate) fn internal(e: impl fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "lightesd", version, about = "Weight-free time-series anomaly detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect anomalies in a CSV series and print a JSON report.
    Detect(detect::DetectArgs),
    /// Generate a synthetic benchmark series with injected anomalies.
    Gen(gen::GenArgs),
    /// Score the detector on both synthetic presets across seeds.
    Bench(bench::BenchArgs),
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
        }
    };
    let result = match cli.command {
        Command::Detect(a) => detect::run(&a),
        Command::Gen(a) => gen::run(&a),
        Command::Bench(a) => bench::run(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lightesd: {e}");
            e.exit_code()
        }
    }
}

/// Writes to `path`, or stdout when absent.
pub(crate) fn emit(path: Option<&std::path::Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| internal(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).map_err(internal)?;
            out.flush().map_err(internal)
        }
    }
}
