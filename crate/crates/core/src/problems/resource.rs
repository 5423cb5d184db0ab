//! Resource allocation: choose a subset of projects to maximize expected
//! reward minus the expected overage cost of random resource demands,
//! `max_theta r . theta - c * E[(W . theta - q)^+]`. Costs are reported
//! negated so every problem exposes a loss to minimize.

use super::ParetoSpec;
use crate::ensemble::{BaseLearner, LossOracle};
use crate::error::{LearnFailure, Result, VoteError};
use crate::model::VoteModel;
use crate::rng::{RngStream, TaskRng};
use crate::sample::SampleBatch;

/// Frozen seed for the Monte-Carlo true-risk oracle; recorded alongside
/// every reported risk so results are reproducible.
pub const RESOURCE_ORACLE_SEED: u64 = 0x5245_534f_5243_4c45;

/// Default draw count for the Monte-Carlo true-risk oracle.
pub const RESOURCE_ORACLE_DRAWS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceAllocParams {
    pub rewards: Vec<f64>,
    pub unit_cost: f64,
    pub low_cost_quantity: f64,
    /// Per-project Pareto shape of the resource demand.
    pub shapes: Vec<f64>,
}

impl ResourceAllocParams {
    pub fn new(
        rewards: Vec<f64>,
        unit_cost: f64,
        low_cost_quantity: f64,
        shapes: Vec<f64>,
    ) -> Result<Self> {
        let m = rewards.len();
        if m == 0 || m > 20 {
            return Err(VoteError::InvalidArgument(format!(
                "project count must be in 1..=20 for subset enumeration, got {m}"
            )));
        }
        if shapes.len() != m {
            return Err(VoteError::InvalidArgument(
                "one demand shape is required per project".into(),
            ));
        }
        for &alpha in &shapes {
            ParetoSpec::new(alpha)?;
        }
        if unit_cost.is_nan()
            || unit_cost < 0.0
            || low_cost_quantity.is_nan()
            || low_cost_quantity < 0.0
        {
            return Err(VoteError::InvalidArgument(
                "unit cost and low-cost quantity must be nonnegative".into(),
            ));
        }
        Ok(Self {
            rewards,
            unit_cost,
            low_cost_quantity,
            shapes,
        })
    }

    /// Three-project default instance with Pareto(2.1) demands.
    pub fn default_instance() -> Self {
        Self::new(vec![3.0, 2.0, 1.5], 1.0, 4.0, vec![2.1, 2.1, 2.1]).unwrap()
    }

    pub fn project_count(&self) -> usize {
        self.rewards.len()
    }
}

fn subset_vector(mask: usize, m: usize) -> Vec<u8> {
    (0..m).map(|i| ((mask >> i) & 1) as u8).collect()
}

fn overage(theta: &[u8], demand: &[f64], quantity: f64) -> f64 {
    let used: f64 = theta
        .iter()
        .zip(demand)
        .filter(|(&t, _)| t == 1)
        .map(|(_, &w)| w)
        .sum();
    (used - quantity).max(0.0)
}

/// Per-observation cost of a subset: negated reward plus overage penalty.
/// Averaging over observations gives the (negated) SAA objective.
pub fn resource_alloc_loss(params: &ResourceAllocParams, theta: &[u8], demand: &[f64]) -> f64 {
    let reward: f64 = theta
        .iter()
        .zip(&params.rewards)
        .map(|(&t, &r)| f64::from(t) * r)
        .sum();
    -(reward - params.unit_cost * overage(theta, demand, params.low_cost_quantity))
}

/// Draws `n` demand vectors, one independent Pareto per project.
pub fn gen_resource_alloc(
    n: usize,
    params: &ResourceAllocParams,
    stream: RngStream,
) -> Result<SampleBatch<Vec<f64>>> {
    let specs: Vec<ParetoSpec> = params
        .shapes
        .iter()
        .map(|&alpha| ParetoSpec::new(alpha))
        .collect::<Result<_>>()?;
    let mut rng = stream.rng();
    let items = (0..n)
        .map(|_| specs.iter().map(|spec| spec.sample(&mut rng)).collect())
        .collect();
    SampleBatch::new(items)
}

/// SAA by exhaustive enumeration of all `2^m` subsets; the empirical mean
/// replaces the expectation. Ties resolve to the smallest model key.
pub fn resource_alloc_saa(batch: &[Vec<f64>], params: &ResourceAllocParams) -> Vec<u8> {
    let m = params.project_count();
    let mut best: Option<(f64, Vec<u8>)> = None;
    for mask in 0..(1usize << m) {
        let theta = subset_vector(mask, m);
        let cost = batch
            .iter()
            .map(|demand| resource_alloc_loss(params, &theta, demand))
            .sum::<f64>()
            / batch.len() as f64;
        let better = match &best {
            None => true,
            Some((best_cost, best_theta)) => {
                cost < *best_cost || (cost == *best_cost && theta.key() < best_theta.key())
            }
        };
        if better {
            best = Some((cost, theta));
        }
    }
    best.expect("at least the empty subset was evaluated").1
}

/// Frozen Monte-Carlo estimate of every subset's expected cost. The seed and
/// per-subset standard errors are recorded with the table.
#[derive(Debug, Clone)]
pub struct ResourceOracle {
    params: ResourceAllocParams,
    expected_costs: Vec<f64>,
    standard_errors: Vec<f64>,
    pub seed: u64,
    pub draws: usize,
}

impl ResourceOracle {
    pub fn new(params: &ResourceAllocParams, draws: usize, seed: u64) -> Result<Self> {
        let m = params.project_count();
        let specs: Vec<ParetoSpec> = params
            .shapes
            .iter()
            .map(|&alpha| ParetoSpec::new(alpha))
            .collect::<Result<_>>()?;
        let subsets = 1usize << m;
        let mut sums = vec![0.0f64; subsets];
        let mut squares = vec![0.0f64; subsets];
        let mut rng = RngStream::from_seed(seed).rng();
        let mut demand = vec![0.0f64; m];
        for _ in 0..draws {
            for (slot, spec) in demand.iter_mut().zip(&specs) {
                *slot = spec.sample(&mut rng);
            }
            for mask in 0..subsets {
                let mut used = 0.0;
                for (i, &w) in demand.iter().enumerate() {
                    if (mask >> i) & 1 == 1 {
                        used += w;
                    }
                }
                let penalty = (used - params.low_cost_quantity).max(0.0);
                sums[mask] += penalty;
                squares[mask] += penalty * penalty;
            }
        }

        let mut expected_costs = Vec::with_capacity(subsets);
        let mut standard_errors = Vec::with_capacity(subsets);
        for mask in 0..subsets {
            let mean_penalty = sums[mask] / draws as f64;
            let var = (squares[mask] / draws as f64 - mean_penalty * mean_penalty).max(0.0);
            let penalty_se = (var / draws as f64).sqrt();
            let theta = subset_vector(mask, m);
            let reward: f64 = theta
                .iter()
                .zip(&params.rewards)
                .map(|(&t, &r)| f64::from(t) * r)
                .sum();
            expected_costs.push(-(reward - params.unit_cost * mean_penalty));
            standard_errors.push(params.unit_cost * penalty_se);
        }

        Ok(Self {
            params: params.clone(),
            expected_costs,
            standard_errors,
            seed,
            draws,
        })
    }

    pub fn with_defaults(params: &ResourceAllocParams) -> Result<Self> {
        Self::new(params, RESOURCE_ORACLE_DRAWS, RESOURCE_ORACLE_SEED)
    }

    fn mask_of(&self, theta: &[u8]) -> usize {
        theta
            .iter()
            .enumerate()
            .fold(0usize, |mask, (i, &t)| mask | ((t as usize & 1) << i))
    }

    /// Expected cost (negated objective) of a subset.
    pub fn true_risk(&self, theta: &[u8]) -> f64 {
        self.expected_costs[self.mask_of(theta)]
    }

    pub fn standard_error(&self, theta: &[u8]) -> f64 {
        self.standard_errors[self.mask_of(theta)]
    }

    /// The best expected cost over all subsets.
    pub fn optimal_risk(&self) -> f64 {
        self.expected_costs
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_standard_error(&self) -> f64 {
        self.standard_errors.iter().cloned().fold(0.0, f64::max)
    }

    pub fn params(&self) -> &ResourceAllocParams {
        &self.params
    }
}

pub struct ResourceSaaLearner {
    pub params: ResourceAllocParams,
}

impl BaseLearner<Vec<f64>> for ResourceSaaLearner {
    type Model = Vec<u8>;

    fn fit(
        &self,
        sample: &[Vec<f64>],
        _rng: &mut TaskRng,
    ) -> std::result::Result<Vec<u8>, LearnFailure> {
        Ok(resource_alloc_saa(sample, &self.params))
    }
}

pub struct ResourceLoss {
    pub params: ResourceAllocParams,
}

impl LossOracle<Vec<f64>, Vec<u8>> for ResourceLoss {
    fn loss(&self, model: &Vec<u8>, observation: &Vec<f64>) -> f64 {
        resource_alloc_loss(&self.params, model, observation)
    }
}
