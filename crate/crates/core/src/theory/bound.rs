//! The four-term finite-sample tail bound for the majority-vote ensemble.

use super::kl_bernoulli;
use crate::error::{Result, VoteError};

/// Inputs to the majority-vote bound: the maximal selection probability,
/// the selection-probability gap to the best non-delta-optimal model, the
/// data/subsample/ensemble sizes, and the model-space cardinality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub p_max: f64,
    pub eta: f64,
    pub n: u64,
    pub k: u64,
    pub b: u64,
    pub cardinality: u64,
}

impl BoundInputs {
    pub fn new(p_max: f64, eta: f64, n: u64, k: u64, b: u64, cardinality: u64) -> Result<Self> {
        if !(p_max > 0.0 && p_max <= 1.0) {
            return Err(VoteError::InvalidArgument(format!(
                "p_max must lie in (0, 1], got {p_max}"
            )));
        }
        if !(eta > 0.0 && eta <= p_max) {
            return Err(VoteError::InvalidArgument(format!(
                "eta must lie in (0, p_max], got {eta} with p_max = {p_max}"
            )));
        }
        if n == 0 || k == 0 || b == 0 || cardinality == 0 {
            return Err(VoteError::InvalidArgument(
                "n, k, b and cardinality must be positive".into(),
            ));
        }
        if k > n {
            return Err(VoteError::InvalidArgument(format!(
                "k = {k} must not exceed n = {n}"
            )));
        }
        Ok(Self {
            p_max,
            eta,
            n,
            k,
            b,
            cardinality,
        })
    }
}

/// The four exponential terms of the bound, before the cardinality factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms {
    /// `exp(-(n/2k) D(p_max - 3eta/4 || p_max - eta))`
    pub downward_crossing: f64,
    /// `2 exp(-(n/2k) D(p_max - eta/4 || p_max))`
    pub downward_estimation: f64,
    /// `exp(-(B/24) eta^2 / (min(p_max, 1-p_max) + 3eta/4))`
    pub monte_carlo: f64,
    /// `1{p_max + eta/4 <= 1} exp(-(n/2k) D(p_max + eta/4 || p_max)
    ///   - (B/24) eta^2 / (1 - p_max + eta/4))`
    pub upward_crossing: f64,
}

impl BoundTerms {
    pub fn sum(&self) -> f64 {
        self.downward_crossing + self.downward_estimation + self.monte_carlo + self.upward_crossing
    }

    pub fn as_array(&self) -> [f64; 4] {
        [
            self.downward_crossing,
            self.downward_estimation,
            self.monte_carlo,
            self.upward_crossing,
        ]
    }
}

/// Evaluates the four terms. KL terms against a degenerate reference use the
/// infinity sentinel, so their exponentials vanish cleanly.
pub fn move_bound_terms(inputs: &BoundInputs) -> BoundTerms {
    let BoundInputs {
        p_max,
        eta,
        n,
        k,
        b,
        ..
    } = *inputs;
    let rate = n as f64 / (2.0 * k as f64);
    let ensemble = b as f64 / 24.0;

    let downward_crossing = (-rate * kl_bernoulli(p_max - 0.75 * eta, p_max - eta)).exp();
    let downward_estimation = 2.0 * (-rate * kl_bernoulli(p_max - 0.25 * eta, p_max)).exp();
    let monte_carlo = (-ensemble * eta * eta / (p_max.min(1.0 - p_max) + 0.75 * eta)).exp();
    let upward_crossing = if p_max + 0.25 * eta <= 1.0 {
        (-rate * kl_bernoulli(p_max + 0.25 * eta, p_max)
            - ensemble * eta * eta / (1.0 - p_max + 0.25 * eta))
            .exp()
    } else {
        0.0
    };

    BoundTerms {
        downward_crossing,
        downward_estimation,
        monte_carlo,
        upward_crossing,
    }
}

/// The full bound: cardinality times the sum of the four terms.
pub fn move_bound(inputs: &BoundInputs) -> f64 {
    inputs.cardinality as f64 * move_bound_terms(inputs).sum()
}

/// Tail bound on Phase I retrieval missing every acceptable model.
///
/// With `excess_tail` the probability that one subsample-trained model is
/// unacceptable, the chance that all of Phase I misses is at most
/// `min(exp(-(n/2k1)(1 - 2/e)(1 - excess_tail)),
///      (e^2 excess_tail / (e - 1))^((1 - 1/e) n / (2 k1)))
///  + exp(-b1 (1 - excess_tail) / e)`.
pub fn retrieval_bound(excess_tail: f64, n: u64, k1: u64, b1: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&excess_tail) {
        return Err(VoteError::InvalidArgument(format!(
            "excess tail must lie in [0, 1], got {excess_tail}"
        )));
    }
    if n == 0 || k1 == 0 || b1 == 0 || k1 > n {
        return Err(VoteError::InvalidArgument(format!(
            "need 1 <= k1 <= n and b1 >= 1, got n = {n}, k1 = {k1}, b1 = {b1}"
        )));
    }
    let e = std::f64::consts::E;
    let rate = n as f64 / (2.0 * k1 as f64);
    let hit = 1.0 - excess_tail;
    let additive = (-rate * (1.0 - 2.0 / e) * hit).exp();
    let multiplicative = (e * e * excess_tail / (e - 1.0)).powf((1.0 - 1.0 / e) * rate);
    Ok(additive.min(multiplicative) + (-(b1 as f64) * hit / e).exp())
}
