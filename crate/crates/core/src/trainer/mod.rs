//! Training by sampling.
//!
//! The trainable state is a score vector `s` whose clip to `[0, 1]` is the
//! probability vector `p`. In sampled mode each step draws `z ~ Bern(p)`,
//! runs the network on `w = Q·z` and pushes the weight gradient back through
//! `Qᵀ` as if `z` were `p` (straight-through). Continuous mode uses
//! `w = Q·p` directly. Either way the score gradient is masked to the
//! coordinates with `0 < p < 1` and applied with Adam.

mod adam;
mod evaluate;
mod mask;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::influence::InfluenceMatrix;
use crate::network::{self, Batch, WeightLayout};
use crate::rng::{SeedSpec, Stream};

pub use adam::{ScoreVector, BETA1, BETA2, EPSILON};
pub use evaluate::{evaluate, evaluate_with, sampled_accuracies, AccuracyStats, EvalKind};
pub use mask::BinaryMask;

/// `max(min(x, 1), 0)`.
pub fn clip(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if let Some(j) = p.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidParameter(format!(
                "probability {} at index {j} outside [0, 1]",
                p[j]
            )));
        }
        Ok(ProbVector(p))
    }

    pub fn from_unclipped(scores: &[f64]) -> Self {
        ProbVector(scores.iter().map(|&s| clip(s)).collect())
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Nearest vertex of the hypercube; `0.5` rounds up.
    pub fn discretize(&self) -> BinaryMask {
        let bits: Vec<bool> = self.0.iter().map(|&x| x >= 0.5).collect();
        BinaryMask::from_bools(&bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum InitLaw {
    Uniform,
    Beta { alpha: f64, beta: f64 },
}

/// Draw the initial probabilities from the [`Stream::ProbInit`] stream.
pub fn init_p(n: usize, law: InitLaw, seed: SeedSpec) -> Result<ProbVector> {
    if n == 0 {
        return Err(Error::InvalidParameter("probability vector must be non-empty".into()));
    }
    let mut rng = seed.rng(Stream::ProbInit);
    let p = match law {
        InitLaw::Uniform => (0..n).map(|_| rng.random::<f64>()).collect(),
        InitLaw::Beta { alpha, beta } => {
            let dist =
                Beta::new(alpha, beta).map_err(|e| Error::InvalidParameter(format!("beta({alpha}, {beta}): {e}")))?;
            (0..n).map(|_| clip(dist.sample(&mut rng))).collect()
        }
    };
    ProbVector::new(p)
}

/// Independent `z_j ~ Bern(p_j)`.
pub fn sample_mask<R: Rng + ?Sized>(p: &ProbVector, rng: &mut R) -> BinaryMask {
    let mut mask = BinaryMask::zeros(p.len());
    for (j, &pj) in p.as_slice().iter().enumerate() {
        if rng.random::<f64>() < pj {
            mask.set(j, true);
        }
    }
    mask
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainMode {
    Sampled,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub min_delta: f64,
    pub batch_size: usize,
    pub mode: TrainMode,
    pub eval_samples: usize,
    /// Sampled networks evaluated per epoch for the history (0 skips).
    pub history_samples: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            max_epochs: 100,
            patience: 10,
            min_delta: 1e-4,
            batch_size: 128,
            mode: TrainMode::Sampled,
            eval_samples: 100,
            history_samples: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("learning rate {}", self.learning_rate)));
        }
        if self.max_epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter("epochs and batch size must be positive".into()));
        }
        Ok(())
    }
}

/// An influence matrix paired with the network it parameterizes.
#[derive(Debug, Clone, Copy)]
pub struct Model<'a> {
    pub q: &'a InfluenceMatrix,
    pub layout: &'a WeightLayout,
}

impl<'a> Model<'a> {
    pub fn new(q: &'a InfluenceMatrix, layout: &'a WeightLayout) -> Result<Self> {
        if q.rows() != layout.len() {
            return Err(Error::dim("influence matrix rows", layout.len(), q.rows()));
        }
        Ok(Model { q, layout })
    }

    pub fn params(&self) -> usize {
        self.q.cols()
    }

    pub fn weights(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.q.expand(v)
    }
}

/// One optimization step on `batch`; returns the batch loss.
pub fn train_step<R: Rng + ?Sized>(
    state: &mut ScoreVector,
    model: Model<'_>,
    batch: &Batch,
    mode: TrainMode,
    learning_rate: f64,
    rng: &mut R,
) -> Result<f64> {
    if state.len() != model.params() {
        return Err(Error::dim("score vector", model.params(), state.len()));
    }
    let p = state.probs();
    let w = match mode {
        TrainMode::Sampled => model.weights(&sample_mask(&p, rng).to_f64())?,
        TrainMode::Continuous => model.weights(p.as_slice())?,
    };
    let g = network::grad(model.layout, &w, batch)?;
    let score_grad = model.q.backproject(&g.grad, p.as_slice())?;
    state.adam_step(&score_grad, learning_rate);
    Ok(g.loss)
}

/// One shuffled pass over `data`; returns the sample-weighted mean loss.
pub fn run_epoch<R: Rng + ?Sized>(
    state: &mut ScoreVector,
    model: Model<'_>,
    data: &Dataset,
    batch_size: usize,
    mode: TrainMode,
    learning_rate: f64,
    rng: &mut R,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(rng);
    let mut total = 0.0;
    for chunk in order.chunks(batch_size.max(1)) {
        let batch = data.batch(chunk);
        let loss = train_step(state, model, &batch, mode, learning_rate, rng)?;
        total += loss * chunk.len() as f64;
    }
    Ok(total / data.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub expected_acc: Option<f64>,
    pub sampled_mean: Option<f64>,
    pub sampled_std: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub probs: ProbVector,
    pub history: Vec<EpochRecord>,
    pub stopped_early: bool,
}

/// Epoch loop with early stopping on the training loss.
///
/// Training stops once the loss has failed to improve on the best value by
/// more than `min_delta` for `patience` consecutive epochs, or after
/// `max_epochs`. If `monitor` is given, each history row also carries the
/// expected-network accuracy on it (and sampled accuracy when
/// `history_samples > 0`).
pub fn train_local(
    config: &TrainConfig,
    model: Model<'_>,
    train: &Dataset,
    monitor: Option<&Dataset>,
    init: ProbVector,
    seed: SeedSpec,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if init.len() != model.params() {
        return Err(Error::dim("initial probabilities", model.params(), init.len()));
    }
    let mut state = ScoreVector::from_probs(&init);
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut stale = 0;
    let mut stopped_early = false;

    for epoch in 0..config.max_epochs {
        let mut rng = seed.rng(Stream::Shuffle { epoch: epoch as u64 });
        let loss = run_epoch(
            &mut state,
            model,
            train,
            config.batch_size,
            config.mode,
            config.learning_rate,
            &mut rng,
        )?;
        if !loss.is_finite() {
            return Err(Error::NonFinite("training loss"));
        }

        let mut record = EpochRecord {
            epoch,
            loss,
            expected_acc: None,
            sampled_mean: None,
            sampled_std: None,
        };
        if let Some(eval_set) = monitor {
            let p = state.probs();
            record.expected_acc = Some(evaluate(model, &p, eval_set, EvalKind::Expected, seed, 0)?.mean);
            if config.history_samples > 0 {
                let stats = evaluate(
                    model,
                    &p,
                    eval_set,
                    EvalKind::Sampled(config.history_samples),
                    seed,
                    epoch as u64,
                )?;
                record.sampled_mean = Some(stats.mean);
                record.sampled_std = Some(stats.std);
            }
        }
        history.push(record);

        if loss < best - config.min_delta {
            best = loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                stopped_early = true;
                break;
            }
        }
    }

    Ok(TrainOutcome {
        probs: state.probs(),
        history,
        stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ArchSpec;

    #[test]
    fn clip_examples() {
        assert_eq!(clip(1.5), 1.0);
        assert_eq!(clip(-0.3), 0.0);
        assert_eq!(clip(0.5), 0.5);
    }

    #[test]
    fn uniform_init_mean() {
        let p = init_p(100_000, InitLaw::Uniform, SeedSpec::new(1)).unwrap();
        let mean = p.as_slice().iter().sum::<f64>() / p.len() as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
        assert_eq!(p, init_p(100_000, InitLaw::Uniform, SeedSpec::new(1)).unwrap());
    }

    #[test]
    fn invalid_beta_is_rejected() {
        let err = init_p(10, InitLaw::Beta { alpha: 0.0, beta: 1.0 }, SeedSpec::new(1));
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
        assert!(init_p(0, InitLaw::Uniform, SeedSpec::new(1)).is_err());
    }

    #[test]
    fn degenerate_masks() {
        let mut rng = SeedSpec::new(0).rng(Stream::Data);
        assert_eq!(
            sample_mask(&ProbVector::constant(50, 0.0).unwrap(), &mut rng).count_ones(),
            0
        );
        assert_eq!(
            sample_mask(&ProbVector::constant(50, 1.0).unwrap(), &mut rng).count_ones(),
            50
        );
    }

    #[test]
    fn bernoulli_frequency() {
        let mut rng = SeedSpec::new(4).rng(Stream::Data);
        let m = sample_mask(&ProbVector::constant(100_000, 0.3).unwrap(), &mut rng);
        let rate = m.count_ones() as f64 / 1e5;
        assert!((rate - 0.3).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn discretize_ties_round_up() {
        let p = ProbVector::new(vec![0.49, 0.5, 0.51, 0.0, 1.0]).unwrap();
        assert_eq!(
            p.discretize().iter().collect::<Vec<_>>(),
            vec![false, true, true, false, true]
        );
    }

    #[test]
    fn prob_vector_rejects_out_of_range() {
        assert!(ProbVector::new(vec![0.2, 1.01]).is_err());
        assert!(ProbVector::new(vec![f64::NAN]).is_err());
    }

    fn toy() -> (InfluenceMatrix, WeightLayout, Dataset) {
        let arch = ArchSpec::new(vec![4, 6, 3]).unwrap();
        let layout = WeightLayout::new(&arch);
        let q = InfluenceMatrix::generate(&layout.fan_ins(), 20, 4, SeedSpec::new(3)).unwrap();
        let data = crate::data::synthetic_blobs(10, 3, 4, 6.0, 1).unwrap();
        (q, layout, data)
    }

    #[test]
    fn zero_learning_rate_leaves_p_unchanged() {
        let (q, layout, data) = toy();
        let model = Model::new(&q, &layout).unwrap();
        let p = init_p(20, InitLaw::Uniform, SeedSpec::new(5)).unwrap();
        let mut state = ScoreVector::from_probs(&p);
        let mut rng = SeedSpec::new(0).rng(Stream::Data);
        for mode in [TrainMode::Sampled, TrainMode::Continuous] {
            train_step(&mut state, model, &data.full_batch(), mode, 0.0, &mut rng).unwrap();
        }
        assert_eq!(state.probs(), p);
    }

    #[test]
    fn saturated_p_is_a_fixed_point() {
        let (q, layout, data) = toy();
        let model = Model::new(&q, &layout).unwrap();
        let bits: Vec<f64> = (0..20).map(|j| (j % 2) as f64).collect();
        let p = ProbVector::new(bits).unwrap();
        let mut state = ScoreVector::from_probs(&p);
        let mut rng = SeedSpec::new(0).rng(Stream::Data);
        for _ in 0..3 {
            train_step(&mut state, model, &data.full_batch(), TrainMode::Sampled, 0.1, &mut rng).unwrap();
        }
        assert_eq!(state.probs(), p);
    }

    #[test]
    fn patience_zero_stops_at_first_stale_epoch() {
        let (q, layout, data) = toy();
        let model = Model::new(&q, &layout).unwrap();
        let p = init_p(20, InitLaw::Uniform, SeedSpec::new(5)).unwrap();
        // a zero learning rate in continuous mode makes every epoch identical
        let config = TrainConfig {
            learning_rate: 0.0,
            patience: 0,
            mode: TrainMode::Continuous,
            batch_size: 8,
            ..TrainConfig::default()
        };
        let out = train_local(&config, model, &data, None, p, SeedSpec::new(1)).unwrap();
        assert_eq!(out.history.len(), 2);
        assert!(out.stopped_early);
    }

    #[test]
    fn patience_counts_stale_epochs() {
        let (q, layout, data) = toy();
        let model = Model::new(&q, &layout).unwrap();
        let p = init_p(20, InitLaw::Uniform, SeedSpec::new(5)).unwrap();
        let config = TrainConfig {
            learning_rate: 0.0,
            patience: 3,
            mode: TrainMode::Continuous,
            ..TrainConfig::default()
        };
        let out = train_local(&config, model, &data, None, p, SeedSpec::new(1)).unwrap();
        assert_eq!(out.history.len(), 4);
    }

    #[test]
    fn training_is_deterministic() {
        let (q, layout, data) = toy();
        let model = Model::new(&q, &layout).unwrap();
        let p = init_p(20, InitLaw::Uniform, SeedSpec::new(5)).unwrap();
        let config = TrainConfig {
            learning_rate: 0.05,
            max_epochs: 5,
            batch_size: 7,
            ..TrainConfig::default()
        };
        let a = train_local(&config, model, &data, Some(&data), p.clone(), SeedSpec::new(2)).unwrap();
        let b = train_local(&config, model, &data, Some(&data), p, SeedSpec::new(2)).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.probs, b.probs);
        assert!(a.history.iter().all(|r| r.expected_acc.is_some()));
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let (q, layout, data) = toy();
        let model = Model::new(&q, &layout).unwrap();
        let empty = data.subset(&[]);
        let p = init_p(20, InitLaw::Uniform, SeedSpec::new(5)).unwrap();
        let out = train_local(&TrainConfig::default(), model, &empty, None, p, SeedSpec::new(1));
        assert!(matches!(out, Err(Error::EmptyDataset)));
    }
}
