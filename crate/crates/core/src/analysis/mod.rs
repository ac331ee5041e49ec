//! Closed-form combinatorics and geometry of the construction, Monte Carlo
//! estimators to check them, and the `τ`-hypercube machinery used by the
//! sensitivity and federated reports.

pub mod combinatorics;
pub mod geometry;
pub mod montecarlo;
pub mod sensitivity;

pub use combinatorics::{
    covered_distribution, empty_subset_moment, expected_column_load, expected_empty_fraction, expected_nonzero_weights,
    ln_choose, prob_k_empty_columns,
};
pub use geometry::{
    cherrypick_bracket, cherrypick_p, ln_zonotope_volume_expected, planar_generators, zonotope_volume_exact_2d,
    zonotope_volume_expected, ZonotopeSpec,
};
pub use montecarlo::{Estimate, LoadEstimate};
pub use sensitivity::{
    sensitivity_probe, sensitivity_probe_scoped, MeanStd, PerturbScope, ProbeConfig, SensitivityReport,
};

use crate::error::{Error, Result};
use crate::trainer::ProbVector;

/// The coordinates of `p` that are still undecided at threshold `τ`:
/// `{j : τ ≤ p_j ≤ 1 − τ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauCube {
    tau: f64,
    active: Vec<usize>,
}

impl TauCube {
    pub fn new(p: &ProbVector, tau: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&tau) {
            return Err(Error::InvalidParameter(format!("tau {tau} outside [0, 0.5]")));
        }
        let active = p
            .as_slice()
            .iter()
            .enumerate()
            .filter(|&(_, &x)| tau <= x && x <= 1.0 - tau)
            .map(|(j, _)| j)
            .collect();
        Ok(TauCube { tau, active })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn dimension(&self) -> usize {
        self.active.len()
    }
}

pub fn tau_dimension(p: &ProbVector, tau: f64) -> Result<usize> {
    TauCube::new(p, tau).map(|c| c.dimension())
}

/// Hypercube dimension of the coordinate-wise mean of the client vectors,
/// and the mean of the clients' own dimensions. Either may be larger.
pub fn fed_dimension_report(clients: &[ProbVector], tau: f64) -> Result<(usize, f64)> {
    let first = clients
        .first()
        .ok_or_else(|| Error::InvalidParameter("no client vectors".into()))?;
    let n = first.len();
    let mut mean = vec![0.0; n];
    let mut dims = 0usize;
    for p in clients {
        if p.len() != n {
            return Err(Error::dim("client probabilities", n, p.len()));
        }
        for (acc, &x) in mean.iter_mut().zip(p.as_slice()) {
            *acc += x;
        }
        dims += tau_dimension(p, tau)?;
    }
    let k = clients.len() as f64;
    let mean = ProbVector::new(mean.into_iter().map(|x| (x / k).clamp(0.0, 1.0)).collect())?;
    Ok((tau_dimension(&mean, tau)?, dims as f64 / k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;
    use crate::trainer::{init_p, InitLaw};
    use proptest::prelude::*;

    #[test]
    fn trivial_dimensions() {
        let half = ProbVector::constant(9, 0.5).unwrap();
        assert_eq!(tau_dimension(&half, 0.5).unwrap(), 9);
        assert_eq!(tau_dimension(&half, 0.0).unwrap(), 9);
        let zero = ProbVector::constant(9, 0.0).unwrap();
        assert_eq!(tau_dimension(&zero, 0.01).unwrap(), 0);
        assert_eq!(tau_dimension(&zero, 0.0).unwrap(), 9);
        assert!(tau_dimension(&zero, 0.6).is_err());
        assert!(tau_dimension(&zero, -0.1).is_err());
    }

    #[test]
    fn uniform_dimension_tracks_one_minus_two_tau() {
        let n = 100_000;
        let p = init_p(n, InitLaw::Uniform, SeedSpec::new(17)).unwrap();
        let dim = tau_dimension(&p, 0.2).unwrap() as f64;
        assert!((dim / (0.6 * n as f64) - 1.0).abs() < 0.01, "{dim}");
    }

    #[test]
    fn dimension_report_counterexample() {
        let a = ProbVector::new(vec![0.0]).unwrap();
        let b = ProbVector::new(vec![0.5]).unwrap();
        assert_eq!(fed_dimension_report(&[a, b], 0.4).unwrap(), (0, 0.5));
    }

    #[test]
    fn identical_clients_agree() {
        let p = init_p(50, InitLaw::Uniform, SeedSpec::new(2)).unwrap();
        let (dm, md) = fed_dimension_report(&[p.clone(), p.clone(), p], 0.1).unwrap();
        assert_eq!(dm as f64, md);
        assert!(fed_dimension_report(&[], 0.1).is_err());
    }

    proptest! {
        #[test]
        fn dimension_non_increasing_in_tau(
            p in proptest::collection::vec(0.0f64..=1.0, 0..64),
            a in 0.0f64..=0.5,
            b in 0.0f64..=0.5,
        ) {
            let p = ProbVector::new(p).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(tau_dimension(&p, hi).unwrap() <= tau_dimension(&p, lo).unwrap());
        }
    }
}
