//! Experiment configuration: desk-scale or full-scale defaults, overlaid by
//! an optional TOML document, overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zampling::analysis::ProbeConfig;
use zampling::trainer::{InitLaw, TrainMode};
use zampling::{ArchSpec, TrainConfig};

use crate::error::{CliError, CliResult};

/// An architecture given either by name (`"small"`, `"mnistfc"`) or as an
/// explicit list of layer widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArchChoice {
    Named(String),
    Layers(Vec<usize>),
}

impl ArchChoice {
    pub fn named(name: &str) -> Self {
        ArchChoice::Named(name.to_string())
    }

    pub fn resolve(&self) -> CliResult<ArchSpec> {
        match self {
            ArchChoice::Named(name) => {
                ArchSpec::by_name(name).ok_or_else(|| CliError::config(format!("unknown architecture {name:?}")))
            }
            ArchChoice::Layers(sizes) => Ok(ArchSpec::new(sizes.clone())?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Mnist,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticData {
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub separation: f64,
}

impl Default for SyntheticData {
    fn default() -> Self {
        SyntheticData {
            train_per_class: 200,
            test_per_class: 50,
            separation: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    /// MNIST directory; `--data-dir` and `ZAMPLE_DATA_DIR` take over when unset.
    pub dir: Option<PathBuf>,
    /// Keep only the first this-many training examples.
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    pub synthetic: SyntheticData,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            source: DataSource::Mnist,
            dir: None,
            train_limit: None,
            test_limit: None,
            synthetic: SyntheticData::default(),
        }
    }
}

fn train_config(learning_rate: f64, max_epochs: usize, mode: TrainMode) -> TrainConfig {
    TrainConfig {
        learning_rate,
        max_epochs,
        mode,
        ..TrainConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub arch: ArchChoice,
    pub degrees: Vec<usize>,
    /// Compression factors `m/n`.
    pub compressions: Vec<f64>,
    pub seeds: usize,
    pub eval_samples: usize,
    pub train: TrainConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            arch: ArchChoice::named("small"),
            degrees: vec![1, 10],
            compressions: vec![1.0, 8.0, 32.0],
            seeds: 2,
            eval_samples: 100,
            train: train_config(0.001, 30, TrainMode::Sampled),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FederatedExperiment {
    pub arch: ArchChoice,
    pub compressions: Vec<f64>,
    pub degree: usize,
    pub clients: usize,
    pub rounds: usize,
    pub local_epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub eval_samples: usize,
    pub eval_every: usize,
    pub report_tau: f64,
}

impl Default for FederatedExperiment {
    fn default() -> Self {
        FederatedExperiment {
            arch: ArchChoice::named("mnistfc"),
            compressions: vec![1.0, 8.0, 32.0],
            degree: 10,
            clients: 10,
            rounds: 30,
            local_epochs: 1,
            learning_rate: 0.1,
            batch_size: 128,
            eval_samples: 20,
            eval_every: 5,
            report_tau: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityConfig {
    pub arch: ArchChoice,
    pub degree: usize,
    pub compression: f64,
    pub taus: Vec<f64>,
    pub trials: usize,
    pub sampled_networks: usize,
    /// Also perturb every coordinate, independently of `τ`.
    pub all_coordinates: bool,
    /// Learning rate and epoch budget shared by both training modes.
    pub train: TrainConfig,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        let probe = ProbeConfig::default();
        SensitivityConfig {
            arch: ArchChoice::named("small"),
            degree: 10,
            compression: 1.0,
            taus: vec![0.01, 0.1, 0.2, 0.5],
            trials: probe.trials,
            sampled_networks: probe.sampled_networks,
            all_coordinates: true,
            // A single training run per mode, so the full epoch budget
            // stays cheap even at desk scale.
            train: train_config(0.001, 100, TrainMode::Sampled),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZhouConfig {
    pub arch: ArchChoice,
    pub degrees: Vec<usize>,
    pub seeds: usize,
    /// Sampled masks per trained `p`; the best one is reported.
    pub masks: usize,
    pub train: TrainConfig,
}

impl Default for ZhouConfig {
    fn default() -> Self {
        ZhouConfig {
            arch: ArchChoice::named("mnistfc"),
            degrees: vec![1, 2, 4, 16],
            seeds: 2,
            masks: 100,
            train: train_config(0.001, 10, TrainMode::Sampled),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapConfig {
    pub arch: ArchChoice,
    pub degree: usize,
    pub compression: f64,
    /// `[alpha, beta]` pairs for the initialization law.
    pub betas: Vec<[f64; 2]>,
    pub modes: Vec<TrainMode>,
    pub seeds: usize,
    pub samples: usize,
    pub train: TrainConfig,
}

impl Default for GapConfig {
    fn default() -> Self {
        GapConfig {
            arch: ArchChoice::named("mnistfc"),
            degree: 10,
            compression: 1.0,
            betas: vec![[0.1, 0.1], [1.0, 1.0]],
            modes: vec![TrainMode::Continuous],
            seeds: 3,
            samples: 100,
            train: train_config(0.01, 10, TrainMode::Continuous),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeConfig {
    /// Weights `m`.
    pub weights: usize,
    /// Trainable parameters `n`.
    pub params: usize,
    pub degree: usize,
    pub fan_in: u32,
    pub trials: usize,
    /// Independent draws for the weight-variance estimate.
    pub init_trials: usize,
    /// Fan-ins of the two rows used for the planar zonotope.
    pub zonotope_fan_ins: [u32; 2],
    pub zonotope_degree: usize,
    pub zonotope_trials: usize,
    /// Rows drawn for the cherry-picked magnitude estimate.
    pub cherrypick_rows: usize,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            weights: 2000,
            params: 2000,
            degree: 1,
            fan_in: 784,
            trials: 50,
            init_trials: 10_000,
            zonotope_fan_ins: [2, 2],
            zonotope_degree: 2,
            zonotope_trials: 100_000,
            cherrypick_rows: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainLocalConfig {
    pub arch: ArchChoice,
    pub degree: usize,
    pub compression: f64,
    pub init: InitLaw,
    pub train: TrainConfig,
}

impl Default for TrainLocalConfig {
    fn default() -> Self {
        TrainLocalConfig {
            arch: ArchChoice::named("small"),
            degree: 10,
            compression: 1.0,
            init: InitLaw::Uniform,
            train: TrainConfig {
                history_samples: 10,
                ..train_config(0.001, 30, TrainMode::Sampled)
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub jobs: Option<usize>,
    pub data: DataConfig,
    pub compress_sweep: SweepConfig,
    pub federated: FederatedExperiment,
    pub sensitivity: SensitivityConfig,
    pub zhou_compare: ZhouConfig,
    pub integrality_gap: GapConfig,
    pub analyze: AnalyzeConfig,
    pub train_local: TrainLocalConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ExperimentConfig {
    /// Reduced grids that finish on a single workstation.
    pub fn desk() -> Self {
        ExperimentConfig {
            seed: 1,
            jobs: None,
            data: DataConfig::default(),
            compress_sweep: SweepConfig::default(),
            federated: FederatedExperiment::default(),
            sensitivity: SensitivityConfig::default(),
            zhou_compare: ZhouConfig::default(),
            integrality_gap: GapConfig::default(),
            analyze: AnalyzeConfig::default(),
            train_local: TrainLocalConfig::default(),
        }
    }

    /// The full grids, seed counts and epoch budgets of the original experiments.
    pub fn paper() -> Self {
        let mut c = Self::desk();
        let s = &mut c.compress_sweep;
        s.degrees = vec![1, 5, 10, 50, 100];
        s.compressions = (0..=10).map(|i| f64::from(1u32 << i)).collect();
        s.seeds = 5;
        s.train.max_epochs = 100;

        let f = &mut c.federated;
        f.rounds = 100;
        f.eval_samples = 100;
        f.eval_every = 1;

        let z = &mut c.zhou_compare;
        z.degrees = vec![1, 2, 4, 16, 256];
        z.seeds = 5;
        z.train.max_epochs = 100;

        let g = &mut c.integrality_gap;
        let grid = [0.1, 0.5, 1.0, 2.0, 5.0];
        g.betas = grid.iter().map(|&a| [a, a]).collect();
        g.train.max_epochs = 100;

        c.train_local.train.max_epochs = 100;
        c
    }

    /// Overlay the TOML document `text` on `self`. Keys absent from the
    /// document keep their current values; unknown keys are rejected.
    pub fn overlay_toml(&self, text: &str) -> CliResult<Self> {
        let overlay: toml::Table = toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        let mut base = toml::Table::try_from(self).map_err(|e| CliError::config(format!("config: {e}")))?;
        merge(&mut base, overlay);
        toml::Value::Table(base)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::config(format!("config: {e}")))
    }

    pub fn overlay_file(&self, path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        self.overlay_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration is representable as TOML")
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
