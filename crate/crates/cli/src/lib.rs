//! `nnd` command-line front end: build suites, check score files, administer
//! suites, verify against human judgments, track checkpoints, render reports.

use std::error::Error as StdError;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
mod output;
pub mod render;

pub use config::{Effective, FileConfig, Format};

#[derive(Debug, Parser)]
#[command(name = "nnd", version, about = "Near-negative distinction evaluation")]
pub struct Cli {
    /// TOML config file; command-line flags take precedence over it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Bootstrap seed. Confidence intervals are only computed when a seed is set.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (standard output when absent). For `build`, the suite file.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile an annotation dataset into a test suite.
    Build(commands::build::Args),
    /// Validate score files against a suite.
    CheckScores(commands::check_scores::Args),
    /// Administer a suite and aggregate pass rates per model.
    Administer(commands::administer::Args),
    /// Correlate pass rates with human scores.
    Verify(commands::verify::Args),
    /// Pass rates over a directory of checkpoint score files.
    Series(commands::series::Args),
    /// Render existing result files.
    Report(commands::report::Args),
}

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;

/// Inputs were readable but failed validation.
#[derive(Debug)]
pub struct ValidationFailure(pub String);

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl StdError for ValidationFailure {}

/// Exit code for a failed run: validation failures (including inconsistent
/// scores) get [`EXIT_VALIDATION`], everything else [`EXIT_INPUT`].
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use nnd_core::NndError;
    for cause in err.chain() {
        if cause.is::<ValidationFailure>() {
            return EXIT_VALIDATION;
        }
        if let Some(e) = cause.downcast_ref::<NndError>() {
            return match e {
                NndError::EmptyTokens { .. }
                | NndError::MalformedScore { .. }
                | NndError::ScoreMismatch { .. }
                | NndError::ConflictingScores { .. } => EXIT_VALIDATION,
                _ => EXIT_INPUT,
            };
        }
    }
    EXIT_INPUT
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let effective = Effective::resolve(&file, cli.seed, cli.format);
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Build(args) => commands::build::run(args, &effective, out),
        Command::CheckScores(args) => commands::check_scores::run(args, &effective, out),
        Command::Administer(args) => commands::administer::run(args, &effective, out),
        Command::Verify(args) => commands::verify::run(args, &effective, out),
        Command::Series(args) => commands::series::run(args, &effective, out),
        Command::Report(args) => commands::report::run(args, &effective, out),
    }
}
