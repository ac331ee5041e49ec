//! One local training run with per-epoch history.

use std::path::Path;

use serde::Serialize;
use zampling::trainer::{evaluate_with, init_p, train_local, EpochRecord, EvalKind};
use zampling::{InfluenceMatrix, Model, SeedSpec, WeightLayout};

use super::{build_model, params_for_grid, Report};
use crate::error::{CliError, CliResult};
use crate::Context;

pub const COLUMNS: &[&str] = &[
    "params",
    "degree",
    "epochs",
    "stopped_early",
    "final_loss",
    "expected_acc",
    "sampled_mean",
    "sampled_std",
    "discretized_acc",
];

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub params: usize,
    pub degree: usize,
    pub epochs: usize,
    pub stopped_early: bool,
    pub final_loss: f64,
    pub expected_acc: f64,
    pub sampled_mean: f64,
    pub sampled_std: f64,
    pub discretized_acc: f64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Row,
    pub history: Vec<EpochRecord>,
}

pub fn run(ctx: &Context, matrix: Option<&Path>) -> CliResult<Report<Outcome>> {
    let cfg = &ctx.config.train_local;
    cfg.train.validate()?;
    let arch = cfg.arch.resolve()?;
    let m = arch.param_count();
    let n = params_for_grid(m, &[cfg.compression])?[0];
    let seed = SeedSpec::new(ctx.config.seed);
    let (train, test) = ctx.datasets(&arch)?;

    let (layout, q) = match matrix {
        Some(path) if path.is_file() => {
            let layout = WeightLayout::new(&arch);
            let q = InfluenceMatrix::load(path)?;
            if q.rows() != m || q.cols() != n || q.degree() != cfg.degree {
                return Err(CliError::config(format!(
                    "{}: stored matrix is {}x{} with degree {}, configuration needs {m}x{n} with degree {}",
                    path.display(),
                    q.rows(),
                    q.cols(),
                    q.degree(),
                    cfg.degree
                )));
            }
            (layout, q)
        }
        _ => {
            let built = build_model(&arch, n, cfg.degree, seed)?;
            if let Some(path) = matrix {
                built.1.save(path)?;
            }
            built
        }
    };
    let model = Model::new(&q, &layout)?;

    let init = init_p(n, cfg.init, seed)?;
    let outcome = train_local(&cfg.train, model, &train, Some(&test), init, seed)?;
    let p = &outcome.probs;
    let expected = evaluate_with(ctx.exec, model, p, &test, EvalKind::Expected, seed, 0)?;
    let sampled = evaluate_with(
        ctx.exec,
        model,
        p,
        &test,
        EvalKind::Sampled(cfg.train.eval_samples),
        seed,
        u64::MAX,
    )?;
    let discretized = evaluate_with(ctx.exec, model, p, &test, EvalKind::Discretized, seed, 0)?;

    let summary = Row {
        params: n,
        degree: cfg.degree,
        epochs: outcome.history.len(),
        stopped_early: outcome.stopped_early,
        final_loss: outcome.history.last().map_or(f64::NAN, |r| r.loss),
        expected_acc: expected.mean,
        sampled_mean: sampled.mean,
        sampled_std: sampled.std,
        discretized_acc: discretized.mean,
    };

    let out = ctx.out_dir("train-local")?;
    let mut history = out.jsonl("train_local_history.jsonl")?;
    for record in &outcome.history {
        history.write(record)?;
    }
    let files = vec![
        history.finish()?,
        out.write_csv("train_local.csv", COLUMNS, std::slice::from_ref(&summary))?,
    ];
    Ok(Report {
        rows: Outcome {
            summary,
            history: outcome.history,
        },
        files,
    })
}
