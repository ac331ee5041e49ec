//! Deterministic random streams.
//!
//! Every random quantity in a run is drawn from a ChaCha8 stream keyed by
//! the master seed and a stream label. The key is the 32-byte seed that
//! `rand_core`'s `seed_from_u64` expands from the master seed; the label is
//! hashed to a 64-bit stream id with a SplitMix64 finalizer and selected via
//! `set_stream`. Server and clients that agree on the master seed therefore
//! regenerate the influence matrix bit-for-bit, and per-client streams do
//! not depend on the order in which clients are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

/// Named stream of the experiment's randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Influence matrix generation; shared by server and every client.
    Matrix,
    /// Initial probability vector.
    ProbInit,
    /// Local training of `client` during `round`.
    Client { round: u64, client: u64 },
    /// Mask `mask` of evaluation number `evaluation`.
    Eval { evaluation: u64, mask: u64 },
    /// Batch order for centralized training at `epoch`.
    Shuffle { epoch: u64 },
    /// Sensitivity perturbations.
    Perturb { index: u64 },
    /// Train-set split across clients.
    Partition,
    /// Synthetic data generation.
    Data,
    /// Free-form stream for Monte Carlo estimators: `(experiment, trial)`.
    Trial { experiment: u64, trial: u64 },
}

impl Stream {
    fn id(self) -> u64 {
        let (tag, a, b) = match self {
            Stream::Matrix => (1, 0, 0),
            Stream::ProbInit => (2, 0, 0),
            Stream::Client { round, client } => (3, round, client),
            Stream::Eval { evaluation, mask } => (4, evaluation, mask),
            Stream::Shuffle { epoch } => (5, epoch, 0),
            Stream::Perturb { index } => (6, index, 0),
            Stream::Partition => (7, 0, 0),
            Stream::Data => (8, 0, 0),
            Stream::Trial { experiment, trial } => (9, experiment, trial),
        };
        splitmix64(splitmix64(splitmix64(tag) ^ a) ^ b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        SeedSpec { master_seed }
    }

    pub fn rng(&self, stream: Stream) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(stream.id());
        rng
    }
}

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Box–Muller normal sampler. Caches the second variate of each pair.
#[derive(Debug, Default, Clone)]
pub struct Gaussian {
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new() -> Self {
        Gaussian { spare: None }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the log finite
        let u1 = 1.0 - rng.random::<f64>();
        let u2 = rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}
