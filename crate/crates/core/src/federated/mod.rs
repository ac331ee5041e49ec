//! In-process simulation of the federated protocol.
//!
//! Each round the server broadcasts `p(t)` as `f32`s. Every client resets
//! its scores to the received probabilities, trains on its own shard in
//! sampled mode, samples one mask from the clipped scores and uploads it.
//! The server's next `p` is the mean of the uploaded masks. Only bytes
//! produced by the [`wire`] encoders cross the client/server boundary, and
//! the [`CommLedger`] counts exactly those.

pub mod wire;

use serde::{Deserialize, Serialize};

use crate::analysis::fed_dimension_report;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::influence::InfluenceMatrix;
use crate::network::{ArchSpec, WeightLayout};
use crate::par::Exec;
use crate::rng::{SeedSpec, Stream};
use crate::trainer::{
    evaluate, init_p, run_epoch, sample_mask, EvalKind, InitLaw, Model, ProbVector, ScoreVector, TrainMode,
};

/// Bits per float on the downlink.
pub const FLOAT_BITS: u64 = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FederatedConfig {
    pub clients: usize,
    pub rounds: usize,
    pub local_epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Trainable parameters `n`.
    pub params: usize,
    pub degree: usize,
    pub arch: ArchSpec,
    pub seed: u64,
    pub eval_samples: usize,
    /// Evaluate after every `eval_every`-th round and after the last one.
    pub eval_every: usize,
    /// Threshold for the per-round hypercube dimension report.
    pub report_tau: f64,
}

impl Default for FederatedConfig {
    fn default() -> Self {
        let arch = ArchSpec::mnistfc();
        FederatedConfig {
            clients: 10,
            rounds: 100,
            local_epochs: 1,
            learning_rate: 0.1,
            batch_size: 128,
            params: arch.param_count(),
            degree: 10,
            arch,
            seed: 1,
            eval_samples: 100,
            eval_every: 1,
            report_tau: 0.1,
        }
    }
}

impl FederatedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clients == 0 {
            return Err(Error::InvalidParameter("at least one client is required".into()));
        }
        if self.local_epochs == 0 || self.batch_size == 0 || self.eval_every == 0 {
            return Err(Error::InvalidParameter(
                "local epochs, batch size and evaluation interval must be positive".into(),
            ));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("learning rate {}", self.learning_rate)));
        }
        if !(0.0..=0.5).contains(&self.report_tau) {
            return Err(Error::InvalidParameter(format!(
                "tau {} outside [0, 0.5]",
                self.report_tau
            )));
        }
        Ok(())
    }
}

/// Disjoint shards of a training set, one per client.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    shards: Vec<Vec<usize>>,
}

impl Partition {
    pub fn shards(&self) -> &[Vec<usize>] {
        &self.shards
    }

    pub fn len(&self) -> usize {
        self.shards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shards.is_empty()
    }
}

/// Shuffle `0..len` and cut it into `clients` contiguous shards whose sizes
/// differ by at most one.
pub fn partition_iid(len: usize, clients: usize, seed: SeedSpec) -> Result<Partition> {
    use rand::seq::SliceRandom;

    if clients == 0 || clients > len {
        return Err(Error::InvalidParameter(format!(
            "cannot split {len} samples across {clients} clients"
        )));
    }
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut seed.rng(Stream::Partition));
    let base = len / clients;
    let extra = len % clients;
    let mut shards = Vec::with_capacity(clients);
    let mut start = 0;
    for k in 0..clients {
        let size = base + usize::from(k < extra);
        shards.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(Partition { shards })
}

/// A simulated client owning its shard of the training data.
#[derive(Debug, Clone)]
pub struct Client {
    id: usize,
    shard: Dataset,
}

/// What a client hands back after a round. Only `upload` crosses the wire;
/// `local_probs` stays in-process for reporting.
#[derive(Debug, Clone)]
pub struct ClientReply {
    pub upload: Vec<u8>,
    pub local_probs: ProbVector,
    pub loss: f64,
}

impl Client {
    pub fn new(id: usize, shard: Dataset) -> Self {
        Client { id, shard }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn shard_len(&self) -> usize {
        self.shard.len()
    }

    pub fn local_round(
        &self,
        model: Model<'_>,
        broadcast: &[u8],
        config: &FederatedConfig,
        round: usize,
    ) -> Result<ClientReply> {
        let p = wire::decode_probs(broadcast)?;
        let mut rng = SeedSpec::new(config.seed).rng(Stream::Client {
            round: round as u64,
            client: self.id as u64,
        });
        let mut state = ScoreVector::from_probs(&p);
        let mut loss = 0.0;
        for _ in 0..config.local_epochs {
            loss = run_epoch(
                &mut state,
                model,
                &self.shard,
                config.batch_size,
                TrainMode::Sampled,
                config.learning_rate,
                &mut rng,
            )?;
        }
        let local_probs = state.probs();
        let z = sample_mask(&local_probs, &mut rng);
        Ok(ClientReply {
            upload: wire::encode_mask(&z),
            local_probs,
            loss,
        })
    }
}

pub fn make_clients(train: &Dataset, partition: &Partition) -> Vec<Client> {
    partition
        .shards()
        .iter()
        .enumerate()
        .map(|(k, idx)| Client::new(k, train.subset(idx)))
        .collect()
}

/// Exact traffic, in payload bits and in encoded bytes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CommLedger {
    pub downlink_bits: u64,
    pub uplink_bits: u64,
    pub downlink_wire_bytes: u64,
    pub uplink_wire_bytes: u64,
}

impl CommLedger {
    fn add(&mut self, other: &CommLedger) {
        self.downlink_bits += other.downlink_bits;
        self.uplink_bits += other.uplink_bits;
        self.downlink_wire_bytes += other.downlink_wire_bytes;
        self.uplink_wire_bytes += other.uplink_wire_bytes;
    }
}

/// Per-round reduction in traffic relative to sending all `m` weights as
/// 32-bit floats each way.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommSavings {
    pub client_factor: f64,
    pub server_factor: f64,
}

/// `(32m/n, m/n)`.
pub fn communication_savings(m: usize, n: usize) -> Result<CommSavings> {
    if n == 0 || n > m {
        return Err(Error::InvalidParameter(format!("need 1 <= n <= m, got n={n}, m={m}")));
    }
    let ratio = m as f64 / n as f64;
    Ok(CommSavings {
        client_factor: FLOAT_BITS as f64 * ratio,
        server_factor: ratio,
    })
}

impl CommSavings {
    /// Savings measured from a ledger accumulated over `rounds` rounds with
    /// `clients` clients.
    pub fn from_ledger(ledger: &CommLedger, m: usize, clients: usize, rounds: usize) -> Self {
        let naive = (FLOAT_BITS * m as u64 * clients as u64 * rounds as u64) as f64;
        CommSavings {
            client_factor: naive / ledger.uplink_bits as f64,
            server_factor: naive / ledger.downlink_bits as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundMetrics {
    pub round: usize,
    pub bits_downlink: u64,
    pub bits_uplink: u64,
    pub wire_bytes_downlink: u64,
    pub wire_bytes_uplink: u64,
    pub mean_client_loss: f64,
    pub sampled_mean: Option<f64>,
    pub sampled_std: Option<f64>,
    pub expected_acc: Option<f64>,
    /// Hypercube dimension of the averaged client probabilities.
    pub dim_of_mean: usize,
    /// Mean hypercube dimension of the individual client probabilities.
    pub mean_of_dims: f64,
}

#[derive(Debug, Clone)]
pub struct RoundOutput {
    pub next: ProbVector,
    pub metrics: RoundMetrics,
}

/// Mean of the uploaded masks.
pub fn aggregate(uploads: &[Vec<u8>], n: usize) -> Result<ProbVector> {
    if uploads.is_empty() {
        return Err(Error::InvalidParameter("no uploads to aggregate".into()));
    }
    let mut counts = vec![0u32; n];
    for msg in uploads {
        let z = wire::decode_mask(msg)?;
        if z.len() != n {
            return Err(Error::dim("uploaded mask", n, z.len()));
        }
        for (c, bit) in counts.iter_mut().zip(z.iter()) {
            *c += u32::from(bit);
        }
    }
    let k = uploads.len() as f64;
    ProbVector::new(counts.into_iter().map(|c| f64::from(c) / k).collect())
}

pub fn run_round(
    server_p: &ProbVector,
    model: Model<'_>,
    clients: &[Client],
    config: &FederatedConfig,
    round: usize,
) -> Result<RoundOutput> {
    run_round_with(Exec::default(), server_p, model, clients, config, round)
}

/// One synchronous round; clients run concurrently on `exec`.
pub fn run_round_with(
    exec: Exec,
    server_p: &ProbVector,
    model: Model<'_>,
    clients: &[Client],
    config: &FederatedConfig,
    round: usize,
) -> Result<RoundOutput> {
    if clients.is_empty() {
        return Err(Error::InvalidParameter("no clients".into()));
    }
    let n = model.params();
    if server_p.len() != n {
        return Err(Error::dim("server probabilities", n, server_p.len()));
    }
    let broadcast = wire::encode_probs(server_p);
    let replies = exec.try_map(clients.len(), |k| {
        clients[k].local_round(model, &broadcast, config, round)
    })?;

    let uploads: Vec<Vec<u8>> = replies.iter().map(|r| r.upload.clone()).collect();
    let next = aggregate(&uploads, n)?;

    let k = clients.len() as u64;
    let ledger = CommLedger {
        downlink_bits: FLOAT_BITS * n as u64 * k,
        uplink_bits: n as u64 * k,
        downlink_wire_bytes: broadcast.len() as u64 * k,
        uplink_wire_bytes: uploads.iter().map(|u| u.len() as u64).sum(),
    };
    let local: Vec<ProbVector> = replies.iter().map(|r| r.local_probs.clone()).collect();
    let (dim_of_mean, mean_of_dims) = fed_dimension_report(&local, config.report_tau)?;

    Ok(RoundOutput {
        next,
        metrics: RoundMetrics {
            round,
            bits_downlink: ledger.downlink_bits,
            bits_uplink: ledger.uplink_bits,
            wire_bytes_downlink: ledger.downlink_wire_bytes,
            wire_bytes_uplink: ledger.uplink_wire_bytes,
            mean_client_loss: replies.iter().map(|r| r.loss).sum::<f64>() / replies.len() as f64,
            sampled_mean: None,
            sampled_std: None,
            expected_acc: None,
            dim_of_mean,
            mean_of_dims,
        },
    })
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub final_p: ProbVector,
    pub rounds: Vec<RoundMetrics>,
    pub ledger: CommLedger,
    /// Total weights `m` of the architecture.
    pub weights: usize,
}

/// Full protocol run: shared `Q` and uniform `p(0)` from the master seed,
/// an IID split of `train`, then `rounds` rounds. Every `eval_every`-th
/// round and the last one are evaluated on `test` (expected network plus
/// `eval_samples` sampled networks). `observer` sees every round's metrics as they are produced.
pub fn run_simulation<F>(
    config: &FederatedConfig,
    train: &Dataset,
    test: &Dataset,
    mut observer: F,
) -> Result<SimulationOutcome>
where
    F: FnMut(&RoundMetrics),
{
    config.validate()?;
    let seed = SeedSpec::new(config.seed);
    let layout = WeightLayout::new(&config.arch);
    let q = InfluenceMatrix::generate(&layout.fan_ins(), config.params, config.degree, seed)?;
    let model = Model::new(&q, &layout)?;
    let partition = partition_iid(train.len(), config.clients, seed)?;
    let clients = make_clients(train, &partition);

    let mut p = init_p(config.params, InitLaw::Uniform, seed)?;
    let mut ledger = CommLedger::default();
    let mut rounds = Vec::with_capacity(config.rounds);
    for t in 0..config.rounds {
        let RoundOutput { next, mut metrics } = run_round(&p, model, &clients, config, t)?;
        p = next;
        ledger.add(&CommLedger {
            downlink_bits: metrics.bits_downlink,
            uplink_bits: metrics.bits_uplink,
            downlink_wire_bytes: metrics.wire_bytes_downlink,
            uplink_wire_bytes: metrics.wire_bytes_uplink,
        });
        if (t + 1) % config.eval_every == 0 || t + 1 == config.rounds {
            metrics.expected_acc = Some(evaluate(model, &p, test, EvalKind::Expected, seed, 0)?.mean);
            if config.eval_samples > 0 {
                let stats = evaluate(model, &p, test, EvalKind::Sampled(config.eval_samples), seed, t as u64)?;
                metrics.sampled_mean = Some(stats.mean);
                metrics.sampled_std = Some(stats.std);
            }
        }
        observer(&metrics);
        rounds.push(metrics);
    }

    Ok(SimulationOutcome {
        final_p: p,
        rounds,
        ledger,
        weights: layout.len(),
    })
}
