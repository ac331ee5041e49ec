//! Simulation estimators for the closed forms. Trial `t` of experiment `e`
//! draws everything from `Stream::Trial { experiment: e, trial: t }`, so
//! results do not depend on the executor or on scheduling.

use rand::RngCore;
use serde::Serialize;

use super::geometry::{cherrypick_p, planar_generators, zonotope_volume_exact_2d};
use crate::error::{Error, Result};
use crate::influence::InfluenceMatrix;
use crate::par::Exec;
use crate::rng::{SeedSpec, Stream};
use crate::trainer::{init_p, sample_mask, InitLaw};

const NONZERO: u64 = 1;
const EMPTY: u64 = 2;
const LOAD: u64 = 3;
const ZONOTOPE: u64 = 4;
const INIT_VARIANCE: u64 = 5;
const CHERRYPICK: u64 = 6;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_err = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            f64::NAN
        };
        Estimate {
            mean,
            std_err,
            samples: n,
        }
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err
    }
}

/// Independent seed for one trial of an experiment.
pub fn trial_seed(seed: SeedSpec, experiment: u64, trial: u64) -> SeedSpec {
    SeedSpec::new(seed.rng(Stream::Trial { experiment, trial }).next_u64())
}

fn require_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    Ok(())
}

/// Fraction of nonzero entries of `w = Q·z` for `p ~ U(0,1)ⁿ`,
/// `z ~ Bern(p)`, with a fresh `m × n` matrix every trial.
pub fn mc_nonzero_fraction(
    exec: Exec,
    m: usize,
    n: usize,
    d: usize,
    trials: usize,
    seed: SeedSpec,
) -> Result<Estimate> {
    require_trials(trials)?;
    let fan_ins = vec![n.max(1) as u32; m];
    let fractions = exec.try_map(trials, |t| -> Result<f64> {
        let s = trial_seed(seed, NONZERO, t as u64);
        let q = InfluenceMatrix::generate(&fan_ins, n, d, s)?;
        let p = init_p(n, InitLaw::Uniform, s)?;
        let z = sample_mask(&p, &mut s.rng(Stream::Eval { evaluation: 0, mask: 0 }));
        let w = q.expand_with(Exec::Sequential, &z.to_f64())?;
        Ok(w.iter().filter(|&&x| x != 0.0).count() as f64 / m as f64)
    })?;
    Ok(Estimate::from_samples(&fractions))
}

/// Fraction of empty columns of a fresh `m × n` matrix per trial.
pub fn mc_empty_fraction(exec: Exec, n: usize, d: usize, m: usize, trials: usize, seed: SeedSpec) -> Result<Estimate> {
    require_trials(trials)?;
    let fan_ins = vec![1u32; m];
    let fractions = exec.try_map(trials, |t| -> Result<f64> {
        let q = InfluenceMatrix::generate(&fan_ins, n, d, trial_seed(seed, EMPTY, t as u64))?;
        Ok(q.count_empty_columns() as f64 / n as f64)
    })?;
    Ok(Estimate::from_samples(&fractions))
}

/// Pooled per-column load statistics over several generated matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoadEstimate {
    pub mean: f64,
    pub variance: f64,
    pub columns: usize,
}

/// Column loads of `trials` fresh `m × n` matrices. The mean is fixed at
/// `md/n` by construction; the spread should follow `Binomial(m, d/n)`.
pub fn mc_column_load(exec: Exec, m: usize, n: usize, d: usize, trials: usize, seed: SeedSpec) -> Result<LoadEstimate> {
    require_trials(trials)?;
    let fan_ins = vec![1u32; m];
    let loads = exec.try_map(trials, |t| -> Result<Vec<f64>> {
        let q = InfluenceMatrix::generate(&fan_ins, n, d, trial_seed(seed, LOAD, t as u64))?;
        Ok((0..n).map(|j| q.column_load(j) as f64).collect())
    })?;
    let all: Vec<f64> = loads.concat();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let variance = all.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (all.len() - 1).max(1) as f64;
    Ok(LoadEstimate {
        mean,
        variance,
        columns: all.len(),
    })
}

/// Area of the planar zonotope of a fresh `2 × 2` matrix with the given
/// row fan-ins and degree.
pub fn mc_zonotope_area(exec: Exec, fan_ins: [u32; 2], d: usize, trials: usize, seed: SeedSpec) -> Result<Estimate> {
    require_trials(trials)?;
    let areas = exec.try_map(trials, |t| -> Result<f64> {
        let q = InfluenceMatrix::generate(&fan_ins, 2, d, trial_seed(seed, ZONOTOPE, t as u64))?;
        Ok(zonotope_volume_exact_2d(&planar_generators(&q)?))
    })?;
    Ok(Estimate::from_samples(&areas))
}

/// Variance of `w_0 = Q_0·p`, `p ~ U(0,1)ⁿ`, for a row of the given fan-in,
/// over `trials` independent draws of `Q` and `p`. One coordinate per
/// trial keeps the draws independent.
pub fn mc_init_variance(
    exec: Exec,
    fan_in: u32,
    n: usize,
    d: usize,
    trials: usize,
    seed: SeedSpec,
) -> Result<Estimate> {
    require_trials(trials)?;
    let values = exec.try_map(trials, |t| -> Result<f64> {
        let s = trial_seed(seed, INIT_VARIANCE, t as u64);
        let q = InfluenceMatrix::generate(&[fan_in], n, d, s)?;
        let p = init_p(n, InitLaw::Uniform, s)?;
        Ok(q.expand_with(Exec::Sequential, p.as_slice())?[0])
    })?;
    // E[w] = 0, so the mean of w² estimates the variance.
    let squares: Vec<f64> = values.iter().map(|w| w * w).collect();
    Ok(Estimate::from_samples(&squares))
}

/// Cherry-picked `|Q_i·p*|` over the rows of one `rows × n` matrix.
pub fn mc_cherrypick(exec: Exec, d: usize, fan_in: u32, n: usize, rows: usize, seed: SeedSpec) -> Result<Estimate> {
    require_trials(rows)?;
    let q = InfluenceMatrix::generate(&vec![fan_in; rows], n, d, trial_seed(seed, CHERRYPICK, 0))?;
    let values = exec.try_map(rows, |i| cherrypick_p(&q, i).map(|(_, v)| v))?;
    Ok(Estimate::from_samples(&values))
}
