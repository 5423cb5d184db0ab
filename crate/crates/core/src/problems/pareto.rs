//! Pareto variates with unit scale, the crate's heavy-tail workhorse.

use rand_chacha::rand_core::RngCore;

use crate::error::{Result, VoteError};
use crate::rng::TaskRng;

/// Pareto distribution with scale 1 and shape `alpha`: support `[1, inf)`,
/// survival function `t^-alpha`, mean `alpha / (alpha - 1)` for `alpha > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoSpec {
    alpha: f64,
}

impl ParetoSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha <= 1.0 {
            return Err(VoteError::InvalidArgument(format!(
                "Pareto shape must exceed 1 for a finite mean, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha - 1.0)
    }

    /// Population variance; infinite for `alpha <= 2`.
    pub fn variance(&self) -> f64 {
        if self.alpha <= 2.0 {
            f64::INFINITY
        } else {
            self.alpha / ((self.alpha - 1.0).powi(2) * (self.alpha - 2.0))
        }
    }

    /// Raw moment `E[X^p]`; infinite for `p >= alpha`.
    pub fn raw_moment(&self, p: f64) -> f64 {
        if p >= self.alpha {
            f64::INFINITY
        } else {
            self.alpha / (self.alpha - p)
        }
    }

    /// Inverse-CDF draw consuming exactly one RNG word: `U^(-1/alpha)` with
    /// `U` uniform on `(0, 1]`. Always at least 1.
    pub fn sample(&self, rng: &mut TaskRng) -> f64 {
        let mantissa = (rng.next_u64() >> 11) + 1; // uniform on {1, ..., 2^53}
        let u = mantissa as f64 * (1.0 / 9_007_199_254_740_992.0);
        u.powf(-1.0 / self.alpha)
    }
}
