//! Expected, sampled and discretized accuracy of networks trained from
//! beta-distributed initial probabilities.

use serde::Serialize;
use zampling::trainer::{evaluate, init_p, train_local, EvalKind, InitLaw};
use zampling::{Model, SeedSpec, TrainConfig, TrainMode};

use super::{build_model, params_for_grid, repetition_seed, Report};
use crate::error::{CliError, CliResult};
use crate::Context;

pub const COLUMNS: &[&str] = &[
    "alpha",
    "beta",
    "mode",
    "seed",
    "epochs",
    "expected_acc",
    "sampled_mean",
    "sampled_std",
    "discretized_acc",
    "gap",
];

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub alpha: f64,
    pub beta: f64,
    pub mode: TrainMode,
    pub seed: u64,
    pub epochs: usize,
    pub expected_acc: f64,
    pub sampled_mean: f64,
    pub sampled_std: f64,
    pub discretized_acc: f64,
    /// `|expected − sampled_mean|`.
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// Grouped by `(alpha, beta)`, then mode, then seed.
    pub rows: Vec<Row>,
}

impl Outcome {
    pub fn gaps(&self, alpha: f64, beta: f64, mode: TrainMode) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.alpha == alpha && r.beta == beta && r.mode == mode)
            .map(|r| r.gap)
            .collect()
    }
}

pub fn run(ctx: &Context) -> CliResult<Report<Outcome>> {
    let cfg = &ctx.config.integrality_gap;
    cfg.train.validate()?;
    if cfg.betas.is_empty() || cfg.modes.is_empty() {
        return Err(CliError::config(
            "integrality gap needs at least one beta pair and one mode",
        ));
    }
    let arch = cfg.arch.resolve()?;
    let n = params_for_grid(arch.param_count(), &[cfg.compression])?[0];
    let (train, test) = ctx.datasets(&arch)?;

    let mut cells = Vec::new();
    for &[alpha, beta] in &cfg.betas {
        for &mode in &cfg.modes {
            for s in 0..cfg.seeds {
                cells.push((alpha, beta, mode, repetition_seed(ctx.config.seed, s)));
            }
        }
    }
    let rows = ctx.exec.try_map(cells.len(), |i| -> CliResult<Row> {
        let (alpha, beta, mode, s) = cells[i];
        let seed = SeedSpec::new(s);
        let (layout, q) = build_model(&arch, n, cfg.degree, seed)?;
        let model = Model::new(&q, &layout)?;
        let init = init_p(n, InitLaw::Beta { alpha, beta }, seed)?;
        let train_cfg = TrainConfig {
            mode,
            ..cfg.train.clone()
        };
        let outcome = train_local(&train_cfg, model, &train, None, init, seed)?;
        let p = &outcome.probs;
        let expected = evaluate(model, p, &test, EvalKind::Expected, seed, 0)?.mean;
        let sampled = evaluate(model, p, &test, EvalKind::Sampled(cfg.samples), seed, 0)?;
        Ok(Row {
            alpha,
            beta,
            mode,
            seed: s,
            epochs: outcome.history.len(),
            expected_acc: expected,
            sampled_mean: sampled.mean,
            sampled_std: sampled.std,
            discretized_acc: evaluate(model, p, &test, EvalKind::Discretized, seed, 0)?.mean,
            gap: (expected - sampled.mean).abs(),
        })
    })?;

    let out = ctx.out_dir("integrality-gap")?;
    let files = vec![out.write_csv("integrality_gap.csv", COLUMNS, &rows)?];
    Ok(Report {
        rows: Outcome { rows },
        files,
    })
}
