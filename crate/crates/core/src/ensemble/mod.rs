//! Subsampling machinery and the voting ensemble procedures: majority vote
//! over models, retrieval + epsilon-optimality vote, and adaptive epsilon
//! selection.

mod epsilon;
mod majority;
mod rove;
mod subsample;

pub use epsilon::{epsilon_vote_phase2, select_epsilon, VoteCurve};
pub use majority::run_move;
pub use rove::{retrieve_phase1, run_rove};
pub use subsample::subsample_indices;

use std::collections::BTreeMap;

use crate::error::{LearnFailure, Result, VoteError};
use crate::model::{ModelKey, VoteModel};
use crate::rng::TaskRng;

/// A base learning algorithm: maps a sample (plus an algorithmic RNG stream)
/// to a model. Implementations must be deterministic given the RNG stream.
pub trait BaseLearner<Z>: Sync {
    type Model: VoteModel;

    fn fit(
        &self,
        sample: &[Z],
        rng: &mut TaskRng,
    ) -> std::result::Result<Self::Model, LearnFailure>;
}

/// Pointwise cost of a model on one observation.
pub trait LossOracle<Z, M>: Sync {
    fn loss(&self, model: &M, observation: &Z) -> f64;
}

impl<Z, M, F> LossOracle<Z, M> for F
where
    F: Fn(&M, &Z) -> f64 + Sync,
{
    fn loss(&self, model: &M, observation: &Z) -> f64 {
        self(model, observation)
    }
}

/// How the epsilon threshold for the optimality vote is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonMode {
    Fixed(f64),
    Adaptive,
}

/// Subsample and ensemble sizes for the voting procedures.
///
/// `k`/`b` drive the majority vote; `k1`/`b1` drive candidate retrieval and
/// `k2`/`b2` the optimality vote. `split` reserves the first half of the
/// data for retrieval and the second half for voting.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub k: usize,
    pub k1: usize,
    pub k2: usize,
    pub b: usize,
    pub b1: usize,
    pub b2: usize,
    pub split: bool,
    pub epsilon: EpsilonMode,
}

impl EnsembleConfig {
    /// Majority-vote configuration with everything else defaulted.
    pub fn for_move(k: usize, b: usize) -> Self {
        Self {
            k,
            k1: k,
            k2: k,
            b,
            b1: b,
            b2: b,
            split: false,
            epsilon: EpsilonMode::Adaptive,
        }
    }

    pub fn for_rove(
        k1: usize,
        k2: usize,
        b1: usize,
        b2: usize,
        split: bool,
        epsilon: EpsilonMode,
    ) -> Self {
        Self {
            k: k2,
            k1,
            k2,
            b: b2,
            b1,
            b2,
            split,
            epsilon,
        }
    }

    /// Recommended majority-vote hyperparameters for discrete spaces:
    /// k = max(10, n/200), B = 200.
    pub fn move_recommended(n: usize) -> Self {
        Self::for_move(10usize.max(n / 200), 200)
    }

    /// Recommended retrieval + vote hyperparameters for discrete spaces:
    /// k1 = k2 = max(10, n/200), B1 = 20, B2 = 200.
    pub fn rove_discrete_recommended(n: usize) -> Self {
        let k = 10usize.max(n / 200);
        Self::for_rove(k, k, 20, 200, false, EpsilonMode::Adaptive)
    }

    /// Recommended retrieval + vote hyperparameters for continuous spaces:
    /// k1 = max(30, n/2), k2 = max(30, n/200), B1 = 50, B2 = 200.
    pub fn rove_continuous_recommended(n: usize) -> Self {
        Self::for_rove(
            30usize.max(n / 2),
            30usize.max(n / 200),
            50,
            200,
            false,
            EpsilonMode::Adaptive,
        )
    }

    pub fn with_split(mut self, split: bool) -> Self {
        self.split = split;
        self
    }

    pub fn validate_for_move(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.b == 0 {
            return Err(VoteError::InvalidArgument(
                "k and b must be positive".into(),
            ));
        }
        if self.k >= n {
            return Err(VoteError::InvalidArgument(format!(
                "subsample size k = {} must be smaller than n = {n}",
                self.k
            )));
        }
        Ok(())
    }

    pub fn validate_for_rove(&self, n: usize) -> Result<()> {
        if self.k1 == 0 || self.k2 == 0 || self.b1 == 0 || self.b2 == 0 {
            return Err(VoteError::InvalidArgument(
                "k1, k2, b1 and b2 must be positive".into(),
            ));
        }
        if self.split {
            let half = n / 2;
            if self.k1 > half || self.k2 > half {
                return Err(VoteError::InvalidArgument(format!(
                    "with data splitting, k1 = {} and k2 = {} must be at most floor(n/2) = {half}",
                    self.k1, self.k2
                )));
            }
        } else if self.k1 >= n || self.k2 >= n {
            return Err(VoteError::InvalidArgument(format!(
                "k1 = {} and k2 = {} must be smaller than n = {n}",
                self.k1, self.k2
            )));
        }
        if let EpsilonMode::Fixed(eps) = self.epsilon {
            if eps.is_nan() || eps < 0.0 {
                return Err(VoteError::InvalidArgument(format!(
                    "fixed epsilon must be nonnegative, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

/// Ballot counts keyed by canonical model encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteTally {
    counts: BTreeMap<ModelKey, u64>,
    total_ballots: u64,
}

impl VoteTally {
    pub fn new(counts: BTreeMap<ModelKey, u64>, total_ballots: u64) -> Self {
        Self {
            counts,
            total_ballots,
        }
    }

    pub fn total_ballots(&self) -> u64 {
        self.total_ballots
    }

    pub fn count(&self, key: &ModelKey) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn count_sum(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Iterates entries in ascending key order.
    pub fn iter(&self) -> impl Iterator<Item = (&ModelKey, u64)> {
        self.counts.iter().map(|(k, &c)| (k, c))
    }

    /// The winning entry: maximal count, ties broken by smallest key.
    /// Iteration is in ascending key order, so the first maximum wins.
    pub fn argmax(&self) -> Option<(&ModelKey, u64)> {
        let mut best: Option<(&ModelKey, u64)> = None;
        for (key, &count) in &self.counts {
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((key, count));
            }
        }
        best
    }
}

/// Result of an ensemble run: the winning model, the tally behind it, and
/// (for the retrieval + vote procedure) the candidate set and threshold used.
#[derive(Debug, Clone)]
pub struct EnsembleOutput<M> {
    pub model: M,
    pub key: ModelKey,
    pub tally: VoteTally,
    pub retrieved: Option<Vec<M>>,
    pub epsilon: Option<f64>,
}
