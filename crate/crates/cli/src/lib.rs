//! `semgrid simulate` and `semgrid pipeline`.
//!
//! Every command is a deterministic function of its flags, its input files
//! and its seed: outputs are byte-identical across repeated runs and
//! across `--jobs` values, and each run leaves a `run_manifest.json` with
//! sha256 hashes of what it read and wrote.

mod error;
mod output;
mod pipeline;
mod simulate;

use clap::{Parser, Subcommand};
use semgrid::simulator::NoiseKind;

pub use error::{CliError, EXIT_FAILURE, EXIT_INPUT, EXIT_NO_DOORS, EXIT_OK};
pub use output::{sha256_hex, OutputDir, OutputFile};
pub use pipeline::{
    cmd_pipeline, BackendArg, InputFile, PipelineArgs, PipelineManifest, PipelineOutcome,
    PipelineSettings, RunSummary,
};
pub use simulate::{
    cmd_simulate, Artifact, ArtifactKind, MapEntry, SimulateArgs, SimulateManifest,
    SimulateSettings,
};

pub const MANIFEST_VERSION: u32 = 1;
pub const TOOL: &str = concat!("semgrid ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Parser)]
#[command(name = "semgrid", version, about = "Door detection and place categorization on occupancy grid maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate annotated floorplans, noisy maps and labeled patches.
    Simulate(SimulateArgs),
    /// Detect, validate and categorize doors on a map.
    Pipeline(PipelineArgs),
}

pub fn parse_noise_kind(s: &str) -> Result<NoiseKind, String> {
    match s {
        "gaussian" => Ok(NoiseKind::Gaussian),
        "combined" => Ok(NoiseKind::Combined),
        other => Err(format!("unknown noise kind {other:?}, expected gaussian or combined")),
    }
}

/// Run `f` on a pool of `jobs` threads (0: one per core).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Execute a parsed command line and return the process exit code.
pub fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Simulate(args) => {
            with_jobs(args.jobs, || cmd_simulate(args))??;
            Ok(EXIT_OK)
        }
        Command::Pipeline(args) => {
            let outcome = with_jobs(args.jobs, || cmd_pipeline(args))??;
            Ok(outcome.exit_code)
        }
    }
}
