//! Batch front end: reads a TOML run configuration, runs one subcommand on
//! a worker pool of fixed size and writes JSON/CSV outputs plus a manifest.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 resource or
//! budget error, 4 failed property check or failed certificate.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use psdyn_core::Error;
use thiserror::Error as ThisError;

pub use config::RunConfig;
pub use output::{Manifest, OutputFile};

/// Seed used for every sampling step when neither `--seed` nor
/// `task.seed` is given.
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Parser)]
#[command(name = "psdyn", version, about = "Growth, conformal measures and dimension for rational maps and subshifts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for all sampling; overrides `task.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Entropy bracket with sandwich and multiplicativity constants.
    Entropy,
    /// Critical exponent (rational) or beta/alpha (subshift).
    Dimension,
    /// Patterson-Sullivan cell masses and their diagnostics.
    Measure,
    /// Annulus series and pressure of a tilted cocycle.
    Growth,
    /// Property suite.
    Check,
    /// Future-only cohomologous potential of a two-sided potential.
    ProjectCocycle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Entropy => "entropy",
            Command::Dimension => "dimension",
            Command::Measure => "measure",
            Command::Growth => "growth",
            Command::Check => "check",
            Command::ProjectCocycle => "project-cocycle",
        }
    }
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::CheckFailed(_) => 4,
            CliError::Core(e) => match e {
                Error::Input(_) | Error::Reducible { .. } | Error::Inadmissible(_) | Error::OutsideChart { .. } => 2,
                Error::Resource(_) | Error::InsufficientDepth { .. } | Error::Precision(_) | Error::Io(_) => 3,
                Error::Degenerate(_)
                | Error::Expansion { .. }
                | Error::RootFinding { .. }
                | Error::Evaluation { .. }
                | Error::Shadowing { .. }
                | Error::HolderViolation { .. }
                | Error::Eigen(_) => 4,
            },
        }
    }
}

/// Parses the configuration and runs the command on a pool of
/// `cli.threads` workers.
pub fn run(cli: &Cli) -> Result<Manifest, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg = RunConfig::parse(&text)?;
    if let Some(c) = &cfg.task.command {
        if c != cli.command.name() {
            return Err(CliError::Config(format!(
                "config is for {c:?} but the {:?} command was run",
                cli.command.name()
            )));
        }
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("psdyn-out"));
    let seed = cli.seed.or(cfg.task.seed).unwrap_or(DEFAULT_SEED);
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Config("--threads must be positive".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    pool.install(|| commands::execute(cli.command, &cfg, seed, &out))
}

/// Entry point for the binary; prints errors and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(m) => {
            println!("{}", m.summary());
            0
        }
        Err(e) => {
            eprintln!("psdyn {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(Error::Resource("x".into())).exit_code(), 3);
        assert_eq!(CliError::Core(Error::Degenerate("x".into())).exit_code(), 4);
        assert_eq!(CliError::CheckFailed("x".into()).exit_code(), 4);
        assert_eq!(CliError::Core(Error::Inadmissible(vec![1, 1])).exit_code(), 2);
    }

    #[test]
    fn command_names_match_clap() {
        let cli = Cli::try_parse_from(["psdyn", "project-cocycle", "--config", "x.toml", "--threads", "2"]).unwrap();
        assert_eq!(cli.command, Command::ProjectCocycle);
        assert_eq!(cli.command.name(), "project-cocycle");
        assert_eq!(cli.threads, Some(2));
    }
}
