//! Mean-variance portfolio selection on the probability simplex:
//! minimize `E[((r - mu) . theta)^2]` subject to `theta` in the simplex.
//! Returns mix a family of correlated heavy-tailed factors, the target
//! return floor is chosen inactive, and the SAA is a simplex-constrained
//! quadratic program solved by projected gradient descent.

use super::ParetoSpec;
use crate::ensemble::{BaseLearner, LossOracle};
use crate::error::{LearnFailure, Result, VoteError};
use crate::rng::{RngStream, TaskRng};
use crate::sample::SampleBatch;

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioParams {
    pub assets: usize,
    pub underlying: usize,
    /// Pareto shape of the underlying factor returns; must exceed 2 so the
    /// variance objective is finite.
    pub shape: f64,
    pub return_floor: f64,
}

impl PortfolioParams {
    pub fn new(assets: usize, underlying: usize, shape: f64, return_floor: f64) -> Result<Self> {
        if assets == 0 || underlying < assets || !underlying.is_multiple_of(assets) {
            return Err(VoteError::InvalidArgument(format!(
                "need underlying factors as a positive multiple of assets, got {underlying} for {assets}"
            )));
        }
        if shape.is_nan() || shape <= 2.0 {
            return Err(VoteError::InvalidArgument(format!(
                "factor shape must exceed 2 for a finite variance, got {shape}"
            )));
        }
        let params = Self {
            assets,
            underlying,
            shape,
            return_floor,
        };
        if return_floor.is_nan() || return_floor > params.mean_return() {
            return Err(VoteError::InvalidArgument(format!(
                "return floor {return_floor} must not exceed the asset mean {} so the constraint stays inactive",
                params.mean_return()
            )));
        }
        Ok(params)
    }

    /// Ten assets mixing one hundred Pareto(2.1) factors, as in the paper's
    /// continuous experiment family. The 2.1 shape keeps variances finite.
    pub fn default_instance() -> Self {
        Self::new(10, 100, 2.1, 0.0).unwrap()
    }

    /// Every asset's mean return equals the factor mean.
    pub fn mean_return(&self) -> f64 {
        self.shape / (self.shape - 1.0)
    }

    fn factor_variance(&self) -> f64 {
        ParetoSpec::new(self.shape)
            .expect("validated at construction")
            .variance()
    }

    /// True covariance of the asset returns:
    /// `(v / 4) * (I + (3 / U) * ones)` with `v` the factor variance.
    pub fn true_covariance(&self) -> Vec<Vec<f64>> {
        let v = self.factor_variance();
        let m = self.assets;
        let off = 3.0 / self.underlying as f64;
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| v / 4.0 * (if i == j { 1.0 + off } else { off }))
                    .collect()
            })
            .collect()
    }

    /// True risk of a portfolio under the population covariance.
    pub fn true_risk(&self, theta: &[f64]) -> f64 {
        let v = self.factor_variance();
        let sum: f64 = theta.iter().sum();
        let sq: f64 = theta.iter().map(|t| t * t).sum();
        v / 4.0 * (sq + 3.0 / self.underlying as f64 * sum * sum)
    }

    /// The uniform portfolio is optimal by symmetry.
    pub fn optimal_risk(&self) -> f64 {
        let v = self.factor_variance();
        v / 4.0 * (1.0 / self.assets as f64 + 3.0 / self.underlying as f64)
    }
}

/// Draws `n` return vectors: asset `i` is half its own factor plus half the
/// average of all `U` factors.
pub fn gen_portfolio(
    n: usize,
    params: &PortfolioParams,
    stream: RngStream,
) -> Result<SampleBatch<Vec<f64>>> {
    let spec = ParetoSpec::new(params.shape)?;
    let stride = params.underlying / params.assets;
    let mut rng = stream.rng();
    let mut factors = vec![0.0f64; params.underlying];
    let items = (0..n)
        .map(|_| {
            for slot in factors.iter_mut() {
                *slot = spec.sample(&mut rng);
            }
            let average = factors.iter().sum::<f64>() / params.underlying as f64;
            (0..params.assets)
                .map(|i| 0.5 * factors[i * stride] + 0.5 * average)
                .collect()
        })
        .collect();
    SampleBatch::new(items)
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(point: &[f64]) -> Vec<f64> {
    let mut sorted = point.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite coordinates"));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (j, &value) in sorted.iter().enumerate() {
        cumulative += value;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if value - candidate > 0.0 {
            threshold = candidate;
        }
    }
    point.iter().map(|&x| (x - threshold).max(0.0)).collect()
}

#[derive(Debug, Clone)]
pub struct PgdSolution {
    pub theta: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Empirical objective value at `theta`.
    pub objective: f64,
}

/// Empirical covariance `(1/n) sum (r - mu)(r - mu)^T` with the known mean.
pub fn empirical_covariance(batch: &[Vec<f64>], mean_return: f64) -> Vec<Vec<f64>> {
    let m = batch[0].len();
    let mut cov = vec![vec![0.0f64; m]; m];
    for sample in batch {
        for i in 0..m {
            let di = sample[i] - mean_return;
            for j in 0..m {
                cov[i][j] += di * (sample[j] - mean_return);
            }
        }
    }
    let n = batch.len() as f64;
    for row in &mut cov {
        for value in row {
            *value /= n;
        }
    }
    cov
}

pub fn quadratic_objective(cov: &[Vec<f64>], theta: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, row) in cov.iter().enumerate() {
        for (j, &cij) in row.iter().enumerate() {
            total += theta[i] * cij * theta[j];
        }
    }
    total
}

const PGD_MAX_ITERATIONS: usize = 500;
const PGD_TOLERANCE: f64 = 1e-8;

/// Minimizes `theta' cov theta` over the simplex by projected gradient
/// descent with fixed step `1 / L`, where `L` bounds the Hessian `2 cov` by
/// its largest absolute row sum. Stops when the gradient-mapping norm drops
/// to 1e-8 or after 500 iterations, whichever comes first.
pub fn minimize_variance_pgd(cov: &[Vec<f64>]) -> PgdSolution {
    let m = cov.len();
    let uniform = vec![1.0 / m as f64; m];
    let lipschitz = cov
        .iter()
        .map(|row| 2.0 * row.iter().map(|c| c.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if lipschitz <= 0.0 {
        let objective = quadratic_objective(cov, &uniform);
        return PgdSolution {
            theta: uniform,
            converged: true,
            iterations: 0,
            objective,
        };
    }
    let step = 1.0 / lipschitz;

    let mut theta = uniform;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < PGD_MAX_ITERATIONS {
        iterations += 1;
        let gradient: Vec<f64> = (0..m)
            .map(|i| 2.0 * cov[i].iter().zip(&theta).map(|(c, t)| c * t).sum::<f64>())
            .collect();
        let moved: Vec<f64> = theta
            .iter()
            .zip(&gradient)
            .map(|(t, g)| t - step * g)
            .collect();
        let next = project_simplex(&moved);
        let mapping_norm = theta
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            / step;
        theta = next;
        if mapping_norm <= PGD_TOLERANCE {
            converged = true;
            break;
        }
    }

    let objective = quadratic_objective(cov, &theta);
    PgdSolution {
        theta,
        converged,
        iterations,
        objective,
    }
}

/// SAA of the portfolio problem on a batch of return vectors.
pub fn portfolio_saa(batch: &[Vec<f64>], params: &PortfolioParams) -> PgdSolution {
    let cov = empirical_covariance(batch, params.mean_return());
    minimize_variance_pgd(&cov)
}

pub fn portfolio_loss(theta: &[f64], sample: &[f64], mean_return: f64) -> f64 {
    let centered: f64 = theta
        .iter()
        .zip(sample)
        .map(|(t, r)| t * (r - mean_return))
        .sum();
    centered * centered
}

pub struct PortfolioSaaLearner {
    pub params: PortfolioParams,
}

impl BaseLearner<Vec<f64>> for PortfolioSaaLearner {
    type Model = Vec<f64>;

    fn fit(
        &self,
        sample: &[Vec<f64>],
        _rng: &mut TaskRng,
    ) -> std::result::Result<Vec<f64>, LearnFailure> {
        Ok(portfolio_saa(sample, &self.params).theta)
    }
}

pub struct PortfolioLoss {
    pub mean_return: f64,
}

impl LossOracle<Vec<f64>, Vec<f64>> for PortfolioLoss {
    fn loss(&self, model: &Vec<f64>, observation: &Vec<f64>) -> f64 {
        portfolio_loss(model, observation, self.mean_return)
    }
}
