use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "zample",
    version,
    about = "Training-by-sampling and federated mask compression experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML experiment configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory holding the MNIST IDX files (falls back to $ZAMPLE_DATA_DIR).
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,

    /// Directory that receives the metrics files.
    #[arg(long, global = true, default_value = "results")]
    pub out: PathBuf,

    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for grid cells, clients and sampled networks.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Use the full grids, seed counts and epoch budgets instead of the
    /// desk-scale defaults.
    #[arg(long, global = true)]
    pub paper_scale: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Accuracy of locally trained sampled networks over degree × compression.
    CompressSweep,
    /// Federated runs, one per compression factor.
    Federated,
    /// Perturbation sensitivity of sampled- versus continuously-trained p.
    Sensitivity,
    /// Best sampled mask across influence-matrix degrees at n = m.
    ZhouCompare,
    /// Expected vs sampled vs discretized accuracy under beta initializations.
    IntegralityGap,
    /// Closed-form quantities next to Monte Carlo estimates.
    Analyze,
    /// A single local training run with per-epoch history.
    TrainLocal {
        /// Reuse the influence matrix stored here, or store it after generation.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CompressSweep => "compress-sweep",
            Command::Federated => "federated",
            Command::Sensitivity => "sensitivity",
            Command::ZhouCompare => "zhou-compare",
            Command::IntegralityGap => "integrality-gap",
            Command::Analyze => "analyze",
            Command::TrainLocal { .. } => "train-local",
        }
    }
}
