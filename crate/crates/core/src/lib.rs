//! Model-level voting ensembles over pluggable base learners.
//!
//! The crate provides three layers:
//!
//! - [`ensemble`]: subsampling, the majority vote over models, and the
//!   two-phase retrieval + epsilon-optimality vote, all deterministic given
//!   a master seed.
//! - [`problems`]: desk-scale stochastic-optimization problems (heavy-tailed
//!   LP, regression, resource allocation, matching, portfolio) with SAA base
//!   learners, loss oracles, and true-risk oracles.
//! - [`theory`] and [`harness`]: finite-sample bound calculators and a seeded
//!   replication engine that estimates excess-risk tail probabilities.
//!
//! The `vote-ensemble` binary exposes the `experiment`, `bounds`, and `pk`
//! subcommands on top of these layers.

pub mod config;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod model;
pub mod output;
pub mod problems;
pub mod rng;
pub mod sample;
pub mod theory;

pub use ensemble::{
    epsilon_vote_phase2, retrieve_phase1, run_move, run_rove, select_epsilon, subsample_indices,
    BaseLearner, EnsembleConfig, EnsembleOutput, EpsilonMode, LossOracle, VoteCurve, VoteTally,
};
pub use error::{LearnFailure, Result, VoteError};
pub use model::{ModelKey, VoteModel};
pub use rng::{derive_seed, RngStream, TaskRng};
pub use sample::SampleBatch;
