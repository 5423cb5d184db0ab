//! The one-dimensional stochastic LP with symmetric heavy-tailed cost:
//! minimize `E[z * theta]` over `theta in [0, 1]`, where `z` has mean 1 and
//! a two-sided Pareto tail. The SAA collapses to the sign of the sample
//! mean, so the model space is effectively `{0, 1}` with true risk
//! `L(theta) = theta`.

use super::ParetoSpec;
use crate::ensemble::{BaseLearner, LossOracle};
use crate::error::{LearnFailure, Result};
use crate::rng::{RngStream, TaskRng};
use crate::sample::SampleBatch;

/// Draws `n` observations `z = 1 + (e1 - e2)` with `e1, e2` independent
/// Pareto(`alpha`): symmetric about the mean 1 with full support and
/// polynomial tails.
pub fn gen_lp_example(n: usize, alpha: f64, stream: RngStream) -> Result<SampleBatch<f64>> {
    let spec = ParetoSpec::new(alpha)?;
    let mut rng = stream.rng();
    let items = (0..n)
        .map(|_| {
            let e1 = spec.sample(&mut rng);
            let e2 = spec.sample(&mut rng);
            1.0 + (e1 - e2)
        })
        .collect();
    SampleBatch::new(items)
}

/// SAA of the LP: 1 when the sample mean is negative, otherwise 0
/// (a tie at exactly zero resolves to 0).
pub fn lp_example_saa(batch: &[f64]) -> u8 {
    let mean = batch.iter().sum::<f64>() / batch.len() as f64;
    u8::from(mean < 0.0)
}

/// True risk `L(theta) = theta`; the optimum is 0 at `theta = 0`.
pub fn lp_example_true_risk(theta: u8) -> f64 {
    f64::from(theta)
}

pub fn lp_example_loss(theta: &u8, z: &f64) -> f64 {
    f64::from(*theta) * z
}

/// The SAA as a pluggable base learner.
pub struct LpSaaLearner;

impl BaseLearner<f64> for LpSaaLearner {
    type Model = u8;

    fn fit(&self, sample: &[f64], _rng: &mut TaskRng) -> std::result::Result<u8, LearnFailure> {
        Ok(lp_example_saa(sample))
    }
}

/// Loss oracle for the LP: `l(theta, z) = z * theta`.
pub struct LpLoss;

impl LossOracle<f64, u8> for LpLoss {
    fn loss(&self, model: &u8, observation: &f64) -> f64 {
        lp_example_loss(model, observation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saa_follows_the_sign_of_the_mean() {
        assert_eq!(lp_example_saa(&[-0.5, -0.1]), 1); // mean -0.3
        assert_eq!(lp_example_saa(&[0.0]), 0); // declared tie-break
        assert_eq!(lp_example_saa(&[2.0, 3.4]), 0); // mean 2.7
    }

    #[test]
    fn true_risk_is_the_decision_itself() {
        assert_eq!(lp_example_true_risk(0), 0.0);
        assert_eq!(lp_example_true_risk(1), 1.0);
        // theta = 1 sits 0.5 above the optimum at excess threshold 0.5
        assert!((lp_example_true_risk(1) - lp_example_true_risk(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn generator_rejects_invalid_shape() {
        assert!(gen_lp_example(10, 1.0, RngStream::from_seed(0)).is_err());
    }

    #[test]
    fn sample_mean_is_near_one() {
        let batch = gen_lp_example(1_000_000, 2.1, RngStream::from_seed(13)).unwrap();
        let mean = batch.iter().sum::<f64>() / batch.len() as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
    }

    /// Draws decompose as z = 1 + (e1 - e2) with both Pareto factors >= 1:
    /// replaying the generator's stream must reproduce each observation.
    #[test]
    fn draws_match_the_two_factor_construction() {
        let stream = RngStream::from_seed(17);
        let batch = gen_lp_example(1000, 2.1, stream).unwrap();
        let spec = ParetoSpec::new(2.1).unwrap();
        let mut rng = stream.rng();
        for &z in batch.iter() {
            let e1 = spec.sample(&mut rng);
            let e2 = spec.sample(&mut rng);
            assert!(e1 >= 1.0 && e2 >= 1.0);
            assert_eq!(z, 1.0 + (e1 - e2));
        }
    }

    /// Monte-Carlo check that the lower tail is polynomial: the normalized
    /// product P(z < 1 - t) * t^alpha stays bounded away from zero.
    #[test]
    fn lower_tail_is_polynomially_heavy() {
        let alpha = 2.1;
        let draws = 10_000_000usize;
        let batch = gen_lp_example(draws, alpha, RngStream::from_seed(29)).unwrap();
        for t in [5.0f64, 10.0, 20.0] {
            let count = batch.iter().filter(|&&z| z < 1.0 - t).count();
            let product = (count as f64 / draws as f64) * t.powf(alpha);
            assert!(
                product > 0.2,
                "tail product at t = {t} was {product} ({count} hits)"
            );
        }
    }
}
