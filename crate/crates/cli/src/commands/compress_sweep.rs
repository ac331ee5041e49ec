//! Accuracy of locally trained sampled networks over a grid of influence
//! matrix degrees and compression factors.

use serde::Serialize;
use zampling::trainer::{evaluate, init_p, train_local, EvalKind, InitLaw};
use zampling::{Model, SeedSpec};

use super::{build_model, mean, params_for_grid, repetition_seed, sample_std, Report};
use crate::error::CliResult;
use crate::Context;

pub const COLUMNS: &[&str] = &[
    "degree",
    "compression",
    "params",
    "seed",
    "status",
    "epochs",
    "final_loss",
    "expected_acc",
    "sampled_mean",
    "sampled_std",
];

pub const SUMMARY_COLUMNS: &[&str] = &["degree", "compression", "params", "runs", "sampled_mean", "sampled_std"];

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub degree: usize,
    pub compression: f64,
    pub params: usize,
    pub seed: u64,
    /// `ok`, or `skipped` when the degree exceeds the parameter count.
    pub status: &'static str,
    pub epochs: Option<usize>,
    pub final_loss: Option<f64>,
    pub expected_acc: Option<f64>,
    pub sampled_mean: Option<f64>,
    pub sampled_std: Option<f64>,
}

/// Seed-averaged accuracy of one grid cell.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub degree: usize,
    pub compression: f64,
    pub params: usize,
    pub runs: usize,
    pub sampled_mean: Option<f64>,
    pub sampled_std: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub cells: Vec<Row>,
    pub summary: Vec<Summary>,
}

impl Outcome {
    pub fn mean_accuracy(&self, degree: usize, compression: f64) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.degree == degree && s.compression == compression)
            .and_then(|s| s.sampled_mean)
    }
}

struct Cell {
    degree: usize,
    compression: f64,
    params: usize,
    seed: u64,
}

pub fn run(ctx: &Context) -> CliResult<Report<Outcome>> {
    let cfg = &ctx.config.compress_sweep;
    cfg.train.validate()?;
    let arch = cfg.arch.resolve()?;
    let params = params_for_grid(arch.param_count(), &cfg.compressions)?;
    let (train, test) = ctx.datasets(&arch)?;

    let mut cells = Vec::new();
    for &degree in &cfg.degrees {
        for (&compression, &n) in cfg.compressions.iter().zip(&params) {
            for s in 0..cfg.seeds {
                cells.push(Cell {
                    degree,
                    compression,
                    params: n,
                    seed: repetition_seed(ctx.config.seed, s),
                });
            }
        }
    }

    let rows = ctx.exec.try_map(cells.len(), |i| -> CliResult<Row> {
        let c = &cells[i];
        let mut row = Row {
            degree: c.degree,
            compression: c.compression,
            params: c.params,
            seed: c.seed,
            status: "skipped",
            epochs: None,
            final_loss: None,
            expected_acc: None,
            sampled_mean: None,
            sampled_std: None,
        };
        if c.degree > c.params {
            return Ok(row);
        }
        let seed = SeedSpec::new(c.seed);
        let (layout, q) = build_model(&arch, c.params, c.degree, seed)?;
        let model = Model::new(&q, &layout)?;
        let outcome = train_local(
            &cfg.train,
            model,
            &train,
            None,
            init_p(c.params, InitLaw::Uniform, seed)?,
            seed,
        )?;
        let expected = evaluate(model, &outcome.probs, &test, EvalKind::Expected, seed, 0)?;
        let sampled = evaluate(
            model,
            &outcome.probs,
            &test,
            EvalKind::Sampled(cfg.eval_samples),
            seed,
            0,
        )?;
        row.status = "ok";
        row.epochs = Some(outcome.history.len());
        row.final_loss = outcome.history.last().map(|r| r.loss);
        row.expected_acc = Some(expected.mean);
        row.sampled_mean = Some(sampled.mean);
        row.sampled_std = Some(sampled.std);
        Ok(row)
    })?;

    let mut summary = Vec::new();
    for &degree in &cfg.degrees {
        for (&compression, &n) in cfg.compressions.iter().zip(&params) {
            let accs: Vec<f64> = rows
                .iter()
                .filter(|r| r.degree == degree && r.compression == compression)
                .filter_map(|r| r.sampled_mean)
                .collect();
            summary.push(Summary {
                degree,
                compression,
                params: n,
                runs: accs.len(),
                sampled_mean: (!accs.is_empty()).then(|| mean(&accs)),
                sampled_std: sample_std(&accs),
            });
        }
    }

    let out = ctx.out_dir("compress-sweep")?;
    let files = vec![
        out.write_csv("compress_sweep.csv", COLUMNS, &rows)?,
        out.write_csv("compress_sweep_summary.csv", SUMMARY_COLUMNS, &summary)?,
    ];
    Ok(Report {
        rows: Outcome { cells: rows, summary },
        files,
    })
}
