//! Experiment drivers behind the `zample` binary.
//!
//! Each subcommand lives in [`commands`] as a function of a [`Context`]
//! that returns its rows after writing them under the output directory,
//! so tests can drive experiments without spawning a process.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use zampling::data::{self, Dataset};
use zampling::{ArchSpec, Exec};

use crate::args::{Cli, Command};
use crate::config::{DataConfig, DataSource, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::output::{OutDir, Provenance};

/// Everything a subcommand needs: the resolved configuration, where to
/// write, and how to schedule independent work.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub exec: Exec,
}

impl Context {
    pub fn new(config: ExperimentConfig, out: impl Into<PathBuf>) -> Self {
        let exec = match config.jobs {
            Some(1) => Exec::Sequential,
            _ => Exec::default(),
        };
        Context {
            config,
            out: out.into(),
            exec,
        }
    }

    pub fn out_dir(&self, command: &str) -> CliResult<OutDir> {
        OutDir::create(&self.out, Provenance::new(command, &self.config))
    }

    /// Train and test sets for a network with the shape of `arch`.
    pub fn datasets(&self, arch: &ArchSpec) -> CliResult<(Dataset, Dataset)> {
        load_datasets(&self.config.data, self.config.seed, arch)
    }
}

/// Base defaults, then the TOML file, then flags.
pub fn resolve_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let base = if cli.paper_scale {
        ExperimentConfig::paper()
    } else {
        ExperimentConfig::desk()
    };
    let mut config = match &cli.config {
        Some(path) => base.overlay_file(path)?,
        None => base,
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = Some(jobs);
    }
    if let Some(dir) = &cli.data_dir {
        config.data.dir = Some(dir.clone());
    }
    if config.jobs == Some(0) {
        return Err(CliError::config("--jobs must be at least 1"));
    }
    Ok(config)
}

pub fn load_datasets(data: &DataConfig, seed: u64, arch: &ArchSpec) -> CliResult<(Dataset, Dataset)> {
    let (train, test) = match data.source {
        DataSource::Mnist => {
            let dir = data::resolve_data_dir(data.dir.as_deref()).ok_or_else(|| {
                CliError::data(format!(
                    "no MNIST directory: pass --data-dir, set data.dir, or set {}",
                    data::DATA_DIR_ENV
                ))
            })?;
            data::load_mnist(&dir)?
        }
        DataSource::Synthetic => {
            let s = &data.synthetic;
            let classes = arch.output_dim();
            let all = data::synthetic_blobs(
                s.train_per_class + s.test_per_class,
                classes,
                arch.input_dim(),
                s.separation,
                seed,
            )?;
            // Labels cycle through the classes, so any prefix of whole
            // cycles is balanced.
            let cut = s.train_per_class * classes;
            let train: Vec<usize> = (0..cut).collect();
            let test: Vec<usize> = (cut..all.len()).collect();
            (all.subset(&train), all.subset(&test))
        }
    };
    if train.dim() != arch.input_dim() {
        return Err(CliError::config(format!(
            "architecture expects {} inputs but the data has {}",
            arch.input_dim(),
            train.dim()
        )));
    }
    Ok((truncate(train, data.train_limit), truncate(test, data.test_limit)))
}

fn truncate(set: Dataset, limit: Option<usize>) -> Dataset {
    match limit {
        Some(k) if k < set.len() => set.subset(&(0..k).collect::<Vec<_>>()),
        _ => set,
    }
}

/// Resolve configuration, size the worker pool and run `cli.command`.
/// Returns the metrics files written.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let config = resolve_config(cli)?;
    #[cfg(feature = "parallel")]
    if let Some(jobs) = config.jobs {
        // A second initialization (tests calling `run` repeatedly) keeps the
        // first pool, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let ctx = Context::new(config, &cli.out);
    dispatch(&ctx, &cli.command)
}

pub fn dispatch(ctx: &Context, command: &Command) -> CliResult<Vec<PathBuf>> {
    use commands::*;
    Ok(match command {
        Command::CompressSweep => compress_sweep::run(ctx)?.files,
        Command::Federated => federated::run(ctx)?.files,
        Command::Sensitivity => sensitivity::run(ctx)?.files,
        Command::ZhouCompare => zhou::run(ctx)?.files,
        Command::IntegralityGap => gap::run(ctx)?.files,
        Command::Analyze => analyze::run(ctx)?.files,
        Command::TrainLocal { matrix } => train_local::run(ctx, matrix.as_deref())?.files,
    })
}
