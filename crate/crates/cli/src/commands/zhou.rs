//! Best sampled mask across influence-matrix degrees at `n = m`.

use serde::Serialize;
use zampling::trainer::{evaluate, init_p, sampled_accuracies, train_local, EvalKind, InitLaw};
use zampling::{Exec, Model, SeedSpec};

use super::{build_model, mean, repetition_seed, sample_std, Report};
use crate::error::CliResult;
use crate::Context;

pub const COLUMNS: &[&str] = &["degree", "seed", "epochs", "best_acc", "mean_acc", "expected_acc"];
pub const SUMMARY_COLUMNS: &[&str] = &["degree", "seeds", "mean_best", "std_best", "min_best", "max_best"];

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub degree: usize,
    pub seed: u64,
    pub epochs: usize,
    /// Highest test accuracy among the sampled masks.
    pub best_acc: f64,
    pub mean_acc: f64,
    pub expected_acc: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub degree: usize,
    pub seeds: usize,
    pub mean_best: f64,
    /// Empty for a single seed.
    pub std_best: Option<f64>,
    pub min_best: f64,
    pub max_best: f64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub runs: Vec<Row>,
    pub summary: Vec<Summary>,
}

impl Outcome {
    pub fn best(&self, degree: usize, seed: u64) -> Option<f64> {
        self.runs
            .iter()
            .find(|r| r.degree == degree && r.seed == seed)
            .map(|r| r.best_acc)
    }
}

pub fn run(ctx: &Context) -> CliResult<Report<Outcome>> {
    let cfg = &ctx.config.zhou_compare;
    cfg.train.validate()?;
    let arch = cfg.arch.resolve()?;
    let n = arch.param_count();
    let (train, test) = ctx.datasets(&arch)?;

    let cells: Vec<(usize, u64)> = cfg
        .degrees
        .iter()
        .flat_map(|&d| (0..cfg.seeds).map(move |s| (d, s)))
        .map(|(d, s)| (d, repetition_seed(ctx.config.seed, s)))
        .collect();
    let runs = ctx.exec.try_map(cells.len(), |i| -> CliResult<Row> {
        let (degree, s) = cells[i];
        let seed = SeedSpec::new(s);
        let (layout, q) = build_model(&arch, n, degree, seed)?;
        let model = Model::new(&q, &layout)?;
        let outcome = train_local(
            &cfg.train,
            model,
            &train,
            None,
            init_p(n, InitLaw::Uniform, seed)?,
            seed,
        )?;
        let p = &outcome.probs;
        // Cells already run concurrently; masks within a cell stay sequential.
        let accs = sampled_accuracies(Exec::Sequential, model, p, &test, cfg.masks, seed, 0)?;
        Ok(Row {
            degree,
            seed: s,
            epochs: outcome.history.len(),
            best_acc: accs.iter().copied().fold(f64::NAN, f64::max),
            mean_acc: mean(&accs),
            expected_acc: evaluate(model, p, &test, EvalKind::Expected, seed, 0)?.mean,
        })
    })?;

    let summary: Vec<Summary> = cfg
        .degrees
        .iter()
        .map(|&degree| {
            let bests: Vec<f64> = runs.iter().filter(|r| r.degree == degree).map(|r| r.best_acc).collect();
            Summary {
                degree,
                seeds: bests.len(),
                mean_best: mean(&bests),
                std_best: sample_std(&bests),
                min_best: bests.iter().copied().fold(f64::NAN, f64::min),
                max_best: bests.iter().copied().fold(f64::NAN, f64::max),
            }
        })
        .collect();

    let out = ctx.out_dir("zhou-compare")?;
    let files = vec![
        out.write_csv("zhou_compare.csv", COLUMNS, &runs)?,
        out.write_csv("zhou_summary.csv", SUMMARY_COLUMNS, &summary)?,
    ];
    Ok(Report {
        rows: Outcome { runs, summary },
        files,
    })
}
