use serde::Serialize;

use super::{sample_mask, Model, ProbVector};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::{self, Batch};
use crate::par::Exec;
use crate::rng::{SeedSpec, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalKind {
    /// `w = Q·p`.
    Expected,
    /// `k` networks `w = Q·z` with `z ~ Bern(p)`.
    Sampled(usize),
    /// `w = Q·round(p)` with ties rounding up.
    Discretized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccuracyStats {
    pub mean: f64,
    /// Sample standard deviation; zero for a single network.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AccuracyStats {
    pub fn from_values(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return AccuracyStats {
                mean: f64::NAN,
                std: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
                count,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        AccuracyStats {
            mean,
            std,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            count,
        }
    }
}

pub fn evaluate(
    model: Model<'_>,
    p: &ProbVector,
    data: &Dataset,
    kind: EvalKind,
    seed: SeedSpec,
    evaluation: u64,
) -> Result<AccuracyStats> {
    evaluate_with(Exec::default(), model, p, data, kind, seed, evaluation)
}

/// Accuracy of the expected, sampled or discretized networks on `data`.
/// Sampled masks come from `Stream::Eval { evaluation, mask }`.
pub fn evaluate_with(
    exec: Exec,
    model: Model<'_>,
    p: &ProbVector,
    data: &Dataset,
    kind: EvalKind,
    seed: SeedSpec,
    evaluation: u64,
) -> Result<AccuracyStats> {
    if p.len() != model.params() {
        return Err(Error::dim("probabilities", model.params(), p.len()));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let batch = data.full_batch();
    let values = match kind {
        EvalKind::Expected => vec![accuracy_of(model, p.as_slice(), &batch)?],
        EvalKind::Discretized => vec![accuracy_of(model, &p.discretize().to_f64(), &batch)?],
        EvalKind::Sampled(k) => sampled_on_batch(exec, model, p, &batch, k, seed, evaluation)?,
    };
    Ok(AccuracyStats::from_values(&values))
}

/// Accuracy of each of `k` sampled networks, in mask order.
pub fn sampled_accuracies(
    exec: Exec,
    model: Model<'_>,
    p: &ProbVector,
    data: &Dataset,
    k: usize,
    seed: SeedSpec,
    evaluation: u64,
) -> Result<Vec<f64>> {
    sampled_on_batch(exec, model, p, &data.full_batch(), k, seed, evaluation)
}

fn sampled_on_batch(
    exec: Exec,
    model: Model<'_>,
    p: &ProbVector,
    batch: &Batch,
    k: usize,
    seed: SeedSpec,
    evaluation: u64,
) -> Result<Vec<f64>> {
    exec.try_map(k, |i| {
        let mut rng = seed.rng(Stream::Eval {
            evaluation,
            mask: i as u64,
        });
        let z = sample_mask(p, &mut rng);
        accuracy_of(model, &z.to_f64(), batch)
    })
}

fn accuracy_of(model: Model<'_>, v: &[f64], batch: &Batch) -> Result<f64> {
    let w = model.q.expand_with(Exec::Sequential, v)?;
    network::accuracy(model.layout, &w, batch)
}
