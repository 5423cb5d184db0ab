//! One-dimensional least-squares regression with sign covariates and
//! symmetric heavy-tailed noise: `y = x * theta_star + eps` with
//! `x in {-1, +1}` and `theta_star = 0`, so the excess risk of any estimate
//! `theta in [-1, 1]` is `theta^2`.

use super::ParetoSpec;
use crate::ensemble::{BaseLearner, LossOracle};
use crate::error::{LearnFailure, Result};
use crate::rng::{RngStream, TaskRng};
use crate::sample::SampleBatch;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionObservation {
    pub x: f64,
    pub y: f64,
}

/// Draws `n` observations with `x` uniform on `{-1, +1}` and noise
/// `eps = e1 - e2` from two independent Pareto(`alpha`) factors.
pub fn gen_regression(
    n: usize,
    alpha: f64,
    stream: RngStream,
) -> Result<SampleBatch<RegressionObservation>> {
    let spec = ParetoSpec::new(alpha)?;
    let mut rng = stream.rng();
    let items = (0..n)
        .map(|_| {
            use rand_chacha::rand_core::RngCore;
            let x = if rng.next_u64() & 1 == 0 { -1.0 } else { 1.0 };
            let eps = spec.sample(&mut rng) - spec.sample(&mut rng);
            RegressionObservation { x, y: eps }
        })
        .collect();
    SampleBatch::new(items)
}

/// Least-squares estimate clamped to `[-1, 1]`. With `x^2 = 1` the
/// normal-equation solution is just the mean of `x * y`.
pub fn regression_ls(batch: &[RegressionObservation]) -> f64 {
    let mean = batch.iter().map(|obs| obs.x * obs.y).sum::<f64>() / batch.len() as f64;
    mean.clamp(-1.0, 1.0)
}

/// Excess risk of an estimate: `theta^2` (the `sigma^2` noise floor is
/// common to every model and cancels).
pub fn regression_excess_risk(theta: f64) -> f64 {
    theta * theta
}

pub fn regression_loss(theta: &f64, obs: &RegressionObservation) -> f64 {
    let residual = obs.x * theta - obs.y;
    residual * residual
}

pub struct RegressionLsLearner;

impl BaseLearner<RegressionObservation> for RegressionLsLearner {
    type Model = f64;

    fn fit(
        &self,
        sample: &[RegressionObservation],
        _rng: &mut TaskRng,
    ) -> std::result::Result<f64, LearnFailure> {
        Ok(regression_ls(sample))
    }
}

pub struct RegressionLoss;

impl LossOracle<RegressionObservation, f64> for RegressionLoss {
    fn loss(&self, model: &f64, observation: &RegressionObservation) -> f64 {
        regression_loss(model, observation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(x: f64, y: f64) -> RegressionObservation {
        RegressionObservation { x, y }
    }

    #[test]
    fn least_squares_matches_the_direct_formula() {
        let batch = [obs(1.0, 0.2), obs(-1.0, -0.2)];
        assert!((regression_ls(&batch) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn estimates_are_clamped_to_the_unit_interval() {
        let batch = [obs(1.0, 3.5)];
        assert_eq!(regression_ls(&batch), 1.0);
        let batch = [obs(-1.0, 7.0)];
        assert_eq!(regression_ls(&batch), -1.0);
    }

    #[test]
    fn excess_risk_is_the_square_of_the_estimate() {
        assert_eq!(regression_excess_risk(0.2), 0.2 * 0.2);
        assert_eq!(regression_excess_risk(-1.0), 1.0);
    }

    #[test]
    fn covariates_are_signs_and_noise_is_centered() {
        let batch = gen_regression(200_000, 2.1, RngStream::from_seed(3)).unwrap();
        assert!(batch.iter().all(|o| o.x == 1.0 || o.x == -1.0));
        let mean_y = batch.iter().map(|o| o.y).sum::<f64>() / batch.len() as f64;
        assert!(mean_y.abs() < 0.1, "noise mean {mean_y}");
        let frac_pos = batch.iter().filter(|o| o.x == 1.0).count() as f64 / batch.len() as f64;
        assert!((frac_pos - 0.5).abs() < 0.01);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_regression(50, 2.1, RngStream::from_seed(11)).unwrap();
        let b = gen_regression(50, 2.1, RngStream::from_seed(11)).unwrap();
        assert_eq!(a.items(), b.items());
    }
}
