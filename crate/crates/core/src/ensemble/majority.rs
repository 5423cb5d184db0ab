//! Majority vote over subsample-trained models.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{subsample_indices, BaseLearner, EnsembleConfig, EnsembleOutput, VoteTally};
use crate::error::{Result, VoteError};
use crate::model::{ModelKey, VoteModel};
use crate::rng::{tags, RngStream};
use crate::sample::SampleBatch;

/// Trains `cfg.b` models on independent uniform subsamples of size `cfg.k`
/// and returns the most frequently produced model, ties broken by smallest
/// [`ModelKey`].
///
/// Ensemble members run in parallel on pre-split RNG streams and are reduced
/// in ballot order, so the output is independent of scheduling.
pub fn run_move<Z, L>(
    base: &L,
    data: &SampleBatch<Z>,
    cfg: &EnsembleConfig,
    stream: RngStream,
) -> Result<EnsembleOutput<L::Model>>
where
    Z: Clone + Sync,
    L: BaseLearner<Z>,
{
    let n = data.len();
    cfg.validate_for_move(n)?;

    let fits: Vec<Result<(ModelKey, L::Model)>> = (0..cfg.b)
        .into_par_iter()
        .map(|ballot| {
            let mut sub_rng = stream.child_indexed(tags::SUBSAMPLE, ballot as u64).rng();
            let idx = subsample_indices(n, cfg.k, &mut sub_rng)?;
            let sample: Vec<Z> = idx.iter().map(|&i| data[i].clone()).collect();
            let mut learn_rng = stream.child_indexed(tags::LEARN, ballot as u64).rng();
            let model =
                base.fit(&sample, &mut learn_rng)
                    .map_err(|failure| VoteError::LearnerFailure {
                        ballot,
                        message: failure.message,
                    })?;
            Ok((model.key(), model))
        })
        .collect();

    let mut counts: BTreeMap<ModelKey, u64> = BTreeMap::new();
    let mut representatives: BTreeMap<ModelKey, L::Model> = BTreeMap::new();
    for fit in fits {
        let (key, model) = fit?;
        *counts.entry(key.clone()).or_insert(0) += 1;
        representatives.entry(key).or_insert(model);
    }

    let tally = VoteTally::new(counts, cfg.b as u64);
    let (winner_key, _) = tally.argmax().expect("b >= 1 guarantees a winner");
    let winner_key = winner_key.clone();
    let model = representatives
        .remove(&winner_key)
        .expect("winner was tallied");

    Ok(EnsembleOutput {
        model,
        key: winner_key,
        tally,
        retrieved: None,
        epsilon: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::LearnFailure;
    use crate::rng::TaskRng;

    struct ConstantLearner(u8);

    impl BaseLearner<f64> for ConstantLearner {
        type Model = u8;

        fn fit(
            &self,
            _sample: &[f64],
            _rng: &mut TaskRng,
        ) -> std::result::Result<u8, LearnFailure> {
            Ok(self.0)
        }
    }

    /// Sign-of-mean learner on raw reals, the SAA of the toy LP.
    struct SignLearner;

    impl BaseLearner<f64> for SignLearner {
        type Model = u8;

        fn fit(&self, sample: &[f64], _rng: &mut TaskRng) -> std::result::Result<u8, LearnFailure> {
            let mean = sample.iter().sum::<f64>() / sample.len() as f64;
            Ok(u8::from(mean < 0.0))
        }
    }

    struct FailingLearner;

    impl BaseLearner<f64> for FailingLearner {
        type Model = u8;

        fn fit(
            &self,
            _sample: &[f64],
            _rng: &mut TaskRng,
        ) -> std::result::Result<u8, LearnFailure> {
            Err(LearnFailure::new("solver exploded"))
        }
    }

    fn batch(values: &[f64]) -> SampleBatch<f64> {
        SampleBatch::new(values.to_vec()).unwrap()
    }

    #[test]
    fn constant_learner_takes_every_ballot() {
        let data = batch(&[1.0, 2.0, 3.0]);
        let cfg = EnsembleConfig::for_move(2, 7);
        let out = run_move(&ConstantLearner(42), &data, &cfg, RngStream::from_seed(1)).unwrap();
        assert_eq!(out.model, 42);
        assert_eq!(out.tally.count(&out.key), 7);
        assert_eq!(out.tally.count_sum(), 7);
        assert!(out.retrieved.is_none());
        assert!(out.epsilon.is_none());
    }

    #[test]
    fn k_must_be_smaller_than_n() {
        let data = batch(&[1.0, 2.0]);
        let cfg = EnsembleConfig::for_move(2, 5);
        assert!(run_move(&ConstantLearner(0), &data, &cfg, RngStream::from_seed(1)).is_err());
    }

    #[test]
    fn learner_failures_carry_the_ballot_index() {
        let data = batch(&[1.0, 2.0, 3.0]);
        let cfg = EnsembleConfig::for_move(1, 3);
        let err = run_move(&FailingLearner, &data, &cfg, RngStream::from_seed(1)).unwrap_err();
        match err {
            VoteError::LearnerFailure { ballot, message } => {
                assert_eq!(ballot, 0);
                assert!(message.contains("solver exploded"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    /// Exhaustive enumeration of all C(8,3) = 56 subsets gives the exact
    /// vote distribution; a large ensemble must agree within 0.01.
    #[test]
    fn vote_frequencies_match_subset_enumeration() {
        let values = [1.5, -2.0, 0.25, 3.0, -4.5, 0.75, -0.5, 2.0];
        let data = batch(&values);
        let mut exact = [0u32; 2];
        let mut total = 0u32;
        for a in 0..8 {
            for b in (a + 1)..8 {
                for c in (b + 1)..8 {
                    let mean = (values[a] + values[b] + values[c]) / 3.0;
                    exact[usize::from(mean < 0.0)] += 1;
                    total += 1;
                }
            }
        }
        assert_eq!(total, 56);

        let b = 100_000usize;
        let cfg = EnsembleConfig::for_move(3, b);
        let out = run_move(&SignLearner, &data, &cfg, RngStream::from_seed(77)).unwrap();
        assert_eq!(out.tally.count_sum(), b as u64);
        for theta in [0u8, 1u8] {
            let observed = out.tally.count(&theta.key()) as f64 / b as f64;
            let expected = f64::from(exact[theta as usize]) / 56.0;
            assert!(
                (observed - expected).abs() < 0.01,
                "theta={theta}: observed {observed}, exact {expected}"
            );
        }
    }

    #[test]
    fn identical_inputs_give_identical_outputs() {
        let data = batch(&[0.4, -1.2, 3.3, -0.1, 0.9, -2.2]);
        let cfg = EnsembleConfig::for_move(3, 64);
        let a = run_move(&SignLearner, &data, &cfg, RngStream::from_seed(5)).unwrap();
        let b = run_move(&SignLearner, &data, &cfg, RngStream::from_seed(5)).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.key, b.key);
        assert_eq!(a.tally, b.tally);
    }

    #[test]
    fn winner_is_among_trained_models_with_max_count() {
        let data = batch(&[0.4, -1.2, 3.3, -0.1, 0.9, -2.2, 1.1]);
        let cfg = EnsembleConfig::for_move(2, 51);
        let out = run_move(&SignLearner, &data, &cfg, RngStream::from_seed(9)).unwrap();
        let winner_count = out.tally.count(&out.key);
        assert!(winner_count >= 1);
        assert!(out.tally.iter().all(|(_, c)| c <= winner_count));
    }
}
