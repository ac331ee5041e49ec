//! Training-by-sampling networks whose weights are generated as `w = Q·z`
//! from a fixed sparse random influence matrix `Q` and Bernoulli masks
//! `z ~ Bern(p)`, a simulator of the federated protocol in which clients
//! upload only their masks, and the combinatorial and convex-geometry
//! quantities that describe the construction.

pub mod analysis;
pub mod data;
pub mod error;
pub mod federated;
pub mod influence;
pub mod network;
pub mod par;
pub mod rng;
pub mod trainer;

pub use error::{Error, Result};
pub use influence::{params_for_compression, InfluenceMatrix};
pub use network::{ArchSpec, WeightLayout};
pub use par::Exec;
pub use rng::{SeedSpec, Stream};
pub use trainer::{Model, ProbVector, TrainConfig, TrainMode};
