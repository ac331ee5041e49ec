//! Robustness of sampled-trained versus continuously-trained probability
//! vectors to Gaussian perturbation inside the `τ`-hypercube.

use serde::Serialize;
use zampling::analysis::{sensitivity_probe_scoped, PerturbScope, ProbeConfig, SensitivityReport};
use zampling::trainer::{init_p, train_local, InitLaw};
use zampling::{Model, SeedSpec, TrainConfig, TrainMode};

use super::{build_model, params_for_grid, Report};
use crate::error::CliResult;
use crate::Context;

pub const COLUMNS: &[&str] = &[
    "mode",
    "scope",
    "tau",
    "dimension",
    "base_accuracy",
    "accuracy_mean",
    "accuracy_std",
    "sensitivity_mean",
    "sensitivity_std",
    "deviation_mean",
    "deviation_std",
    "sampled_accuracy_mean",
    "sampled_accuracy_std",
    "trials",
    "note",
];

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub mode: Option<TrainMode>,
    pub scope: &'static str,
    pub tau: Option<f64>,
    pub dimension: Option<usize>,
    pub base_accuracy: Option<f64>,
    pub accuracy_mean: Option<f64>,
    pub accuracy_std: Option<f64>,
    pub sensitivity_mean: Option<f64>,
    pub sensitivity_std: Option<f64>,
    pub deviation_mean: Option<f64>,
    pub deviation_std: Option<f64>,
    pub sampled_accuracy_mean: Option<f64>,
    pub sampled_accuracy_std: Option<f64>,
    pub trials: Option<usize>,
    pub note: Option<String>,
}

impl Row {
    fn from_report(mode: TrainMode, r: &SensitivityReport) -> Self {
        let (scope, tau) = match r.scope {
            PerturbScope::Tau { tau } => ("tau", Some(tau)),
            PerturbScope::All => ("all", None),
        };
        Row {
            mode: Some(mode),
            scope,
            tau,
            dimension: Some(r.dimension),
            base_accuracy: Some(r.base_accuracy),
            accuracy_mean: Some(r.accuracy.mean),
            accuracy_std: Some(r.accuracy.std),
            sensitivity_mean: Some(r.sensitivity.mean),
            sensitivity_std: Some(r.sensitivity.std),
            deviation_mean: Some(r.deviation.mean),
            deviation_std: Some(r.deviation.std),
            sampled_accuracy_mean: Some(r.sampled_accuracy.mean),
            sampled_accuracy_std: Some(r.sampled_accuracy.std),
            trials: Some(r.trials),
            note: None,
        }
    }

    fn warning(note: &str) -> Self {
        Row {
            mode: None,
            scope: "none",
            tau: None,
            dimension: None,
            base_accuracy: None,
            accuracy_mean: None,
            accuracy_std: None,
            sensitivity_mean: None,
            sensitivity_std: None,
            deviation_mean: None,
            deviation_std: None,
            sampled_accuracy_mean: None,
            sampled_accuracy_std: None,
            trials: None,
            note: Some(note.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// `2 × |τ|` rows, sampled mode first; a single warning row for an
    /// empty `τ` list.
    pub rows: Vec<Row>,
    /// One every-coordinate row per mode when enabled.
    pub all_coordinates: Vec<Row>,
}

impl Outcome {
    pub fn find(&self, mode: TrainMode, tau: f64) -> Option<&Row> {
        self.rows.iter().find(|r| r.mode == Some(mode) && r.tau == Some(tau))
    }
}

pub fn run(ctx: &Context) -> CliResult<Report<Outcome>> {
    let cfg = &ctx.config.sensitivity;
    cfg.train.validate()?;
    let out = ctx.out_dir("sensitivity")?;
    if cfg.taus.is_empty() {
        let rows = vec![Row::warning("empty tau list: nothing to perturb")];
        let files = vec![out.write_csv("sensitivity.csv", COLUMNS, &rows)?];
        return Ok(Report {
            rows: Outcome {
                rows,
                all_coordinates: Vec::new(),
            },
            files,
        });
    }

    let arch = cfg.arch.resolve()?;
    let n = params_for_grid(arch.param_count(), &[cfg.compression])?[0];
    let seed = SeedSpec::new(ctx.config.seed);
    let (layout, q) = build_model(&arch, n, cfg.degree, seed)?;
    let model = Model::new(&q, &layout)?;
    let (train, test) = ctx.datasets(&arch)?;
    let init = init_p(n, InitLaw::Uniform, seed)?;
    let probe = ProbeConfig {
        trials: cfg.trials,
        sampled_networks: cfg.sampled_networks,
    };

    let mut rows = Vec::new();
    let mut all_coordinates = Vec::new();
    for mode in [TrainMode::Sampled, TrainMode::Continuous] {
        let train_cfg = TrainConfig {
            mode,
            ..cfg.train.clone()
        };
        let p = train_local(&train_cfg, model, &train, None, init.clone(), seed)?.probs;
        for &tau in &cfg.taus {
            let report = sensitivity_probe_scoped(ctx.exec, model, &p, &test, PerturbScope::Tau { tau }, probe, seed)?;
            rows.push(Row::from_report(mode, &report));
        }
        if cfg.all_coordinates {
            let report = sensitivity_probe_scoped(ctx.exec, model, &p, &test, PerturbScope::All, probe, seed)?;
            all_coordinates.push(Row::from_report(mode, &report));
        }
    }

    let mut files = vec![out.write_csv("sensitivity.csv", COLUMNS, &rows)?];
    if cfg.all_coordinates {
        files.push(out.write_csv("sensitivity_all_coordinates.csv", COLUMNS, &all_coordinates)?);
    }
    Ok(Report {
        rows: Outcome { rows, all_coordinates },
        files,
    })
}
