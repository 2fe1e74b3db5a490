//! Command-line front door: preprocess a tet mesh into a bundle, train a
//! frame field over it, analyze the trained field, or run the embedded
//! oracle suite.
//!
//! Exit codes: 0 success, 2 input error, 3 training divergence, 4 failed
//! selfcheck.

mod bundle;
mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use neurframe_core::TrainError;

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Input(#[from] anyhow::Error),
    #[error("training diverged: {0}")]
    Divergence(TrainError),
    #[error("{failed} of {total} checks failed")]
    Selfcheck { failed: usize, total: usize },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Selfcheck { .. } => 4,
        }
    }

    /// Divergence gets its own exit code; everything else that can go wrong
    /// while training is an input problem.
    fn from_train(e: TrainError) -> CliError {
        match e {
            TrainError::Diverged { .. } | TrainError::NonFinite { .. } => CliError::Divergence(e),
            other => CliError::Input(other.into()),
        }
    }
}

#[derive(Parser)]
#[command(name = "neurframe", version, about = "Neural octahedral frame fields over tet meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize and subdivide a tet mesh, detect features, write a bundle
    Preprocess(PreprocessArgs),
    /// Train a frame field network over a preprocessed bundle
    Train(TrainArgs),
    /// Derive artifacts from a trained checkpoint
    Analyze(AnalyzeArgs),
    /// Run the embedded oracle suite and report per-check status
    Selfcheck,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input mesh in MEDIT format; omit when --primitive is given
    mesh: Option<PathBuf>,
    /// Generate a built-in shape instead of reading a file
    #[arg(long, value_enum, conflicts_with = "mesh")]
    primitive: Option<PrimitiveArg>,
    /// Lattice resolution for --primitive
    #[arg(long, default_value_t = 4)]
    resolution: u32,
    /// Feature segment file (input coordinates); overrides dihedral detection
    #[arg(long)]
    features: Option<PathBuf>,
    /// Dihedral angle threshold for feature detection, in degrees
    #[arg(long, default_value_t = 45.0)]
    feature_angle: f64,
    /// Output bundle directory
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PrimitiveArg {
    Cube,
    Box,
    Cylinder,
    Lshape,
}

#[derive(Args)]
struct TrainArgs {
    /// Preprocessed bundle directory
    #[arg(long)]
    bundle: PathBuf,
    /// JSON config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<usize>,
    /// RNG seed (beats the NEURFRAME_SEED environment variable)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    lambda_smooth: Option<f64>,
    #[arg(long)]
    lambda_boundary: Option<f64>,
    #[arg(long)]
    lambda_feature: Option<f64>,
    /// Feature weighting sharpness
    #[arg(long)]
    sigma: Option<f64>,
    /// Sample this many training points per iteration instead of all
    #[arg(long)]
    minibatch: Option<usize>,
    /// Write a loss row every N iterations
    #[arg(long)]
    log_every: Option<usize>,
    /// Also write an intermediate checkpoint every N iterations
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// Output run directory
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(subcommand)]
    what: AnalyzeCommand,
}

#[derive(Args)]
struct AnalyzeShared {
    /// Trained checkpoint (.nfck)
    #[arg(long)]
    checkpoint: PathBuf,
    /// The bundle the checkpoint was trained against
    #[arg(long)]
    bundle: PathBuf,
    /// Output directory
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Locate singular points by recursive loop classification
    Singularities {
        #[command(flatten)]
        shared: AnalyzeShared,
        /// Number of random seed triangles
        #[arg(long, default_value_t = 500)]
        seeds: usize,
        /// Maximum subdivision depth
        #[arg(long, default_value_t = 8)]
        max_depth: u32,
        /// RNG seed (beats the NEURFRAME_SEED environment variable)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Trace field-aligned polylines from random seed points
    Streamlines {
        #[command(flatten)]
        shared: AnalyzeShared,
        /// Number of streamlines
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Trace over the boundary surface instead of the volume
        #[arg(long)]
        surface: bool,
        /// Step length in normalized units
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 2000)]
        max_steps: usize,
        /// RNG seed (beats the NEURFRAME_SEED environment variable)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Reduce boundary frames to tangent crosses, one per surface triangle
    Crossfield {
        #[command(flatten)]
        shared: AnalyzeShared,
    },
    /// Sample one frame per tet of the input mesh
    Discretize {
        #[command(flatten)]
        shared: AnalyzeShared,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Preprocess(args) => commands::preprocess::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Analyze(args) => commands::analyze::run(args.what),
        Command::Selfcheck => commands::selfcheck::run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}
