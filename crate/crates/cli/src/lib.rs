//! Library behind the `scg` binary: argument parsing, the four commands and
//! their JSON documents. [`run`] maps a command line to an [`Outcome`] so the
//! commands can be driven in-process.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use scg_core::ScgError;

pub mod cache;
pub mod commands;
pub mod document;

pub use document::{RepDocument, SearchDocument, SearchResult};

pub mod exit {
    pub const SUCCESS: u8 = 0;
    /// Verification failed, nothing found, or budget exhausted.
    pub const FAILURE: u8 = 1;
    /// Proven empty.
    pub const EMPTY: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const CAPACITY: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] ScgError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => exit::PARSE,
            CliError::Core(
                ScgError::GroupTooLarge { .. }
                | ScgError::DomainTooLarge { .. }
                | ScgError::OrbitCapExceeded { .. },
            ) => exit::CAPACITY,
            _ => exit::FAILURE,
        }
    }
}

/// What a command printed and how it exits.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn error(e: &CliError) -> Outcome {
        Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") }
    }
}

#[derive(Debug, Parser)]
#[command(name = "scg", version, about = "String C-group representations of Omega(5, q)")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and verify a representation of rank 5, 4 or 3.
    Construct(ConstructArgs),
    /// Re-verify a representation document from scratch.
    Verify(VerifyArgs),
    /// Search for representations of a given rank.
    Search(SearchArgs),
    /// Group order, allowed Schläfli entries, scalar sets and theta(-1).
    Info(InfoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Any,
    Odd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Rank 5, then rank reductions.
    Reduce,
    /// The direct rank 4 family (rank 4 only).
    DirectRank4,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub q: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..=5))]
    pub rank: u32,
    #[arg(long, value_enum, default_value_t = ParityArg::Any)]
    pub parity: ParityArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Reduce)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyModeArg {
    Auto,
    Enumerate,
    Geometric,
    Both,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = VerifyModeArg::Auto)]
    pub mode: VerifyModeArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SearchModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub q: u32,
    #[arg(long)]
    pub rank: usize,
    #[arg(long, value_enum, default_value_t = SearchModeArg::Exhaustive)]
    pub mode: SearchModeArg,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Candidate budget for sampled mode.
    #[arg(long, default_value_t = 20_000)]
    pub max_candidates: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(long)]
    pub q: u32,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => exit::SUCCESS,
                _ => exit::PARSE,
            };
            let text = e.render().to_string();
            return if code == exit::SUCCESS {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let command_line: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let go = || commands::dispatch(&cli.command, &command_line);
    let result = match cli.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(go),
            Err(e) => Err(CliError::Parse(format!("--workers: {e}"))),
        },
        None => go(),
    };
    result.unwrap_or_else(|e| Outcome::error(&e))
}
