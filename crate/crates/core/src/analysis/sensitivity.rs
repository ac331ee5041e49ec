//! Robustness of a trained probability vector to Gaussian perturbation of
//! its non-trivial coordinates.

use serde::Serialize;

use super::TauCube;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::rng::{Gaussian, SeedSpec, Stream};
use crate::trainer::{clip, evaluate, EvalKind, Model, ProbVector};

/// Which coordinates receive noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "scope", rename_all = "lowercase")]
pub enum PerturbScope {
    /// Coordinates with `τ ≤ p_j ≤ 1 − τ`.
    Tau { tau: f64 },
    /// Every coordinate.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation (zero for one value).
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return MeanStd {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeConfig {
    pub trials: usize,
    /// Sampled networks evaluated at each perturbed vector.
    pub sampled_networks: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            trials: 10,
            sampled_networks: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub scope: PerturbScope,
    /// Number of perturbed coordinates.
    pub dimension: usize,
    /// Expected-network accuracy before perturbation.
    pub base_accuracy: f64,
    /// Expected-network accuracy at `clip(p + ε)`.
    pub accuracy: MeanStd,
    /// `|Δacc| / acc₀`.
    pub sensitivity: MeanStd,
    /// `|Δacc| / ‖ε‖₂`, zero when `ε = 0`.
    pub deviation: MeanStd,
    /// Mean accuracy of sampled networks at `clip(p + ε)`.
    pub sampled_accuracy: MeanStd,
    pub trials: usize,
}

struct Trial {
    accuracy: f64,
    sensitivity: f64,
    deviation: f64,
    sampled: f64,
}

/// Perturb the coordinates of the `τ`-hypercube of `p` and measure how the
/// expected network's accuracy on `data` moves.
pub fn sensitivity_probe(
    model: Model<'_>,
    p: &ProbVector,
    data: &Dataset,
    tau: f64,
    config: ProbeConfig,
    seed: SeedSpec,
) -> Result<SensitivityReport> {
    sensitivity_probe_scoped(Exec::default(), model, p, data, PerturbScope::Tau { tau }, config, seed)
}

pub fn sensitivity_probe_scoped(
    exec: Exec,
    model: Model<'_>,
    p: &ProbVector,
    data: &Dataset,
    scope: PerturbScope,
    config: ProbeConfig,
    seed: SeedSpec,
) -> Result<SensitivityReport> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter(
            "at least one perturbation trial is required".into(),
        ));
    }
    let active = match scope {
        PerturbScope::Tau { tau } => TauCube::new(p, tau)?.active().to_vec(),
        PerturbScope::All => (0..p.len()).collect(),
    };
    let base_accuracy = evaluate(model, p, data, EvalKind::Expected, seed, 0)?.mean;
    if base_accuracy <= 0.0 {
        return Err(Error::InvalidParameter(
            "sensitivity is undefined at zero base accuracy".into(),
        ));
    }

    let trials = exec.try_map(config.trials, |t| -> Result<Trial> {
        let mut rng = seed.rng(Stream::Perturb { index: t as u64 });
        let mut gauss = Gaussian::new();
        let mut perturbed = p.as_slice().to_vec();
        let mut norm_sq = 0.0;
        for &j in &active {
            let e = gauss.sample(&mut rng);
            norm_sq += e * e;
            perturbed[j] = clip(perturbed[j] + e);
        }
        let perturbed = ProbVector::new(perturbed)?;
        let accuracy = evaluate(model, &perturbed, data, EvalKind::Expected, seed, 0)?.mean;
        let sampled = if config.sampled_networks > 0 {
            evaluate(
                model,
                &perturbed,
                data,
                EvalKind::Sampled(config.sampled_networks),
                seed,
                t as u64,
            )?
            .mean
        } else {
            f64::NAN
        };
        let delta = (accuracy - base_accuracy).abs();
        let norm = norm_sq.sqrt();
        Ok(Trial {
            accuracy,
            sensitivity: delta / base_accuracy,
            deviation: if norm > 0.0 { delta / norm } else { 0.0 },
            sampled,
        })
    })?;

    let collect = |f: fn(&Trial) -> f64| MeanStd::of(&trials.iter().map(f).collect::<Vec<_>>());
    Ok(SensitivityReport {
        scope,
        dimension: active.len(),
        base_accuracy,
        accuracy: collect(|t| t.accuracy),
        sensitivity: collect(|t| t.sensitivity),
        deviation: collect(|t| t.deviation),
        sampled_accuracy: collect(|t| t.sampled),
        trials: config.trials,
    })
}
