//! Maximum weight matching on a complete bipartite graph with random edge
//! weights, solved exactly by the Hungarian method. Reported costs are
//! negated total weights so the minimization convention holds.

use super::ParetoSpec;
use crate::ensemble::{BaseLearner, LossOracle};
use crate::error::{LearnFailure, Result, VoteError};
use crate::rng::{RngStream, TaskRng};
use crate::sample::SampleBatch;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeWeight {
    Constant(f64),
    Pareto(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingParams {
    pub n_side: usize,
    /// Row-major `n_side x n_side` edge weight distributions.
    pub edges: Vec<EdgeWeight>,
}

impl MatchingParams {
    pub fn new(n_side: usize, edges: Vec<EdgeWeight>) -> Result<Self> {
        if n_side == 0 || n_side > 16 {
            return Err(VoteError::InvalidArgument(format!(
                "side size must be in 1..=16, got {n_side}"
            )));
        }
        if edges.len() != n_side * n_side {
            return Err(VoteError::InvalidArgument(format!(
                "expected {} edge distributions, got {}",
                n_side * n_side,
                edges.len()
            )));
        }
        for edge in &edges {
            if let EdgeWeight::Pareto(alpha) = edge {
                ParetoSpec::new(*alpha)?;
            }
        }
        Ok(Self { n_side, edges })
    }

    /// 5 x 5 default: nine Pareto(2.1) edges (main diagonal plus the first
    /// superdiagonal), constant weight 1 elsewhere.
    pub fn default_instance() -> Self {
        let n = 5;
        let mut edges = vec![EdgeWeight::Constant(1.0); n * n];
        for i in 0..n {
            edges[i * n + i] = EdgeWeight::Pareto(2.1);
            if i + 1 < n {
                edges[i * n + i + 1] = EdgeWeight::Pareto(2.1);
            }
        }
        Self::new(n, edges).unwrap()
    }

    pub fn mean_weights(&self) -> Vec<Vec<f64>> {
        let n = self.n_side;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match self.edges[i * n + j] {
                        EdgeWeight::Constant(w) => w,
                        EdgeWeight::Pareto(alpha) => alpha / (alpha - 1.0),
                    })
                    .collect()
            })
            .collect()
    }
}

/// Draws `n` weight matrices (row-major vectors of length `n_side^2`).
pub fn gen_matching(
    n: usize,
    params: &MatchingParams,
    stream: RngStream,
) -> Result<SampleBatch<Vec<f64>>> {
    enum Draw {
        Fixed(f64),
        Sample(ParetoSpec),
    }
    let draws: Vec<Draw> = params
        .edges
        .iter()
        .map(|edge| match edge {
            EdgeWeight::Constant(w) => Ok(Draw::Fixed(*w)),
            EdgeWeight::Pareto(alpha) => ParetoSpec::new(*alpha).map(Draw::Sample),
        })
        .collect::<Result<_>>()?;
    let mut rng = stream.rng();
    let items = (0..n)
        .map(|_| {
            draws
                .iter()
                .map(|draw| match draw {
                    Draw::Fixed(w) => *w,
                    Draw::Sample(spec) => spec.sample(&mut rng),
                })
                .collect()
        })
        .collect();
    SampleBatch::new(items)
}

fn permutation_total(weights: &[Vec<f64>], perm: &[usize]) -> f64 {
    perm.iter()
        .enumerate()
        .map(|(row, &col)| weights[row][col])
        .sum()
}

/// Hungarian method (shortest augmenting paths with potentials) for the
/// minimum-cost assignment of a square matrix. Returns the column assigned
/// to each row.
fn hungarian_min(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // row matched to each column, 1-based
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let slack = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if slack < min_slack[j] {
                    min_slack[j] = slack;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if matched_row[j] > 0 {
            assignment[matched_row[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Maximum-weight assignment of `weights` restricted to `rows x cols`
/// (both index lists), returned as the chosen column per listed row.
fn best_completion(weights: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> Vec<usize> {
    if rows.is_empty() {
        return Vec::new();
    }
    let max_w = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| weights[r][c]))
        .fold(f64::NEG_INFINITY, f64::max);
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| max_w - weights[r][c]).collect())
        .collect();
    let local = hungarian_min(&cost);
    local.into_iter().map(|cj| cols[cj]).collect()
}

/// Exact maximum-weight matching of the mean weight matrix; ties between
/// optimal matchings resolve to the lexicographically smallest permutation.
///
/// Rows are fixed one at a time: each free column is scored by the best
/// achievable total through it, and the smallest column attaining the
/// maximum wins. Totals of full permutations are always summed in row order
/// so that equal matchings compare equal.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = weights.len();
    let mut prefix: Vec<usize> = Vec::with_capacity(n);
    let mut free: Vec<usize> = (0..n).collect();
    for row in 0..n {
        let mut chosen = 0usize;
        let mut chosen_total = f64::NEG_INFINITY;
        for (slot, &col) in free.iter().enumerate() {
            let mut remaining = free.clone();
            remaining.remove(slot);
            let rest_rows: Vec<usize> = ((row + 1)..n).collect();
            let completion = best_completion(weights, &rest_rows, &remaining);
            let mut candidate = prefix.clone();
            candidate.push(col);
            candidate.extend(completion);
            let total = permutation_total(weights, &candidate);
            if total > chosen_total {
                chosen_total = total;
                chosen = col;
            }
        }
        prefix.push(chosen);
        free.retain(|&c| c != chosen);
    }
    let total = permutation_total(weights, &prefix);
    (prefix, total)
}

/// SAA of the matching problem: solves the assignment problem exactly on the
/// empirical mean weight matrix.
pub fn matching_saa(batch: &[Vec<f64>], params: &MatchingParams) -> Vec<u8> {
    let n = params.n_side;
    let mut means = vec![vec![0.0f64; n]; n];
    for sample in batch {
        for i in 0..n {
            for j in 0..n {
                means[i][j] += sample[i * n + j];
            }
        }
    }
    let count = batch.len() as f64;
    for row in &mut means {
        for value in row {
            *value /= count;
        }
    }
    let (perm, _) = max_weight_assignment(&means);
    perm.into_iter().map(|c| c as u8).collect()
}

/// Expected cost (negated expected total weight) of a permutation.
pub fn matching_true_risk(theta: &[u8], params: &MatchingParams) -> f64 {
    let means = params.mean_weights();
    -theta
        .iter()
        .enumerate()
        .map(|(row, &col)| means[row][col as usize])
        .sum::<f64>()
}

/// The best expected cost over all permutations.
pub fn matching_optimal_risk(params: &MatchingParams) -> f64 {
    let (_, total) = max_weight_assignment(&params.mean_weights());
    -total
}

pub fn matching_loss(theta: &[u8], sample: &[f64], n_side: usize) -> f64 {
    -theta
        .iter()
        .enumerate()
        .map(|(row, &col)| sample[row * n_side + col as usize])
        .sum::<f64>()
}

pub struct MatchingSaaLearner {
    pub params: MatchingParams,
}

impl BaseLearner<Vec<f64>> for MatchingSaaLearner {
    type Model = Vec<u8>;

    fn fit(
        &self,
        sample: &[Vec<f64>],
        _rng: &mut TaskRng,
    ) -> std::result::Result<Vec<u8>, LearnFailure> {
        Ok(matching_saa(sample, &self.params))
    }
}

pub struct MatchingLoss {
    pub n_side: usize,
}

impl LossOracle<Vec<f64>, Vec<u8>> for MatchingLoss {
    fn loss(&self, model: &Vec<u8>, observation: &Vec<f64>) -> f64 {
        matching_loss(model, observation, self.n_side)
    }
}
