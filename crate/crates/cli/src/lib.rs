//! Configuration, dispatch and artifact writing for the `msnet` binary.

pub mod artifact;
pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use thiserror::Error;

use artifact::ArtifactWriter;
use commands::{dispatch, Context, Outcome};
use config::LoadedConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] msnet_core::kernel::ModelError),
    #[error(transparent)]
    Bounds(#[from] msnet_core::bounds::BoundsError),
    #[error(transparent)]
    Asymptotics(#[from] msnet_core::asymptotics::AsymptoticsError),
    #[error(transparent)]
    Estimation(#[from] msnet_core::estimation::EstimationError),
    #[error("internal: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    Axioms,
    Gamma0,
    Bounds,
    Tail,
    Asymptote,
    Moments,
    Bigjump,
    Hcheck,
    Insensitivity,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Axioms => "axioms",
            Subcommand::Gamma0 => "gamma0",
            Subcommand::Bounds => "bounds",
            Subcommand::Tail => "tail",
            Subcommand::Asymptote => "asymptote",
            Subcommand::Moments => "moments",
            Subcommand::Bigjump => "bigjump",
            Subcommand::Hcheck => "hcheck",
            Subcommand::Insensitivity => "insensitivity",
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "msnet", version, about = "Simulation experiments on monotone-separable queueing networks")]
pub struct Args {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed; overrides the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for artifacts.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum)]
    pub subcommand: Subcommand,
}

pub const DEFAULT_SEED: u64 = 1;

/// Runs one subcommand; returns the outcome and the paths written.
pub fn execute(args: &Args) -> Result<(Outcome, Vec<PathBuf>), CliError> {
    let loaded = LoadedConfig::from_path(&args.config)?;
    let seed = args.seed.or(loaded.config.seed).unwrap_or(DEFAULT_SEED);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Internal(e.to_string()))?;
    let mut out = ArtifactWriter::new(&args.out, &loaded.sha256, seed)?;
    let outcome = pool.install(|| {
        let mut ctx = Context { config: &loaded.config, seed, out: &mut out };
        dispatch(args.subcommand, &mut ctx)
    })?;
    Ok((outcome, out.written().to_vec()))
}

/// [`execute`] with the summary printed and errors mapped to exit codes.
pub fn run(args: &Args) -> i32 {
    match execute(args) {
        Ok((o, _)) => {
            println!("{} {}: {}", args.subcommand.name(), if o.passed { "ok" } else { "FAILED" }, o.summary);
            if o.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("{} error: {e}", args.subcommand.name());
            EXIT_CONFIG
        }
    }
}
