//! Two-phase ensembling: candidate retrieval, then the optimality vote.

use rayon::prelude::*;

use super::{
    epsilon_vote_phase2, select_epsilon, subsample_indices, BaseLearner, EnsembleConfig,
    EnsembleOutput, EpsilonMode, LossOracle,
};
use crate::error::{Result, VoteError};
use crate::model::{ModelKey, VoteModel};
use crate::rng::{tags, RngStream};
use crate::sample::SampleBatch;

/// Phase I: trains `cfg.b1` models on subsamples of size `cfg.k1` (from the
/// first half of the data when splitting) and returns the distinct models in
/// first-trained order.
pub fn retrieve_phase1<Z, L>(
    base: &L,
    data: &SampleBatch<Z>,
    cfg: &EnsembleConfig,
    stream: RngStream,
) -> Result<Vec<L::Model>>
where
    Z: Clone + Sync,
    L: BaseLearner<Z>,
{
    cfg.validate_for_rove(data.len())?;
    let region = data.phase1_items(cfg.split);

    let fits: Vec<Result<L::Model>> = (0..cfg.b1)
        .into_par_iter()
        .map(|ballot| {
            let mut sub_rng = stream.child_indexed(tags::SUBSAMPLE, ballot as u64).rng();
            let idx = subsample_indices(region.len(), cfg.k1, &mut sub_rng)?;
            let sample: Vec<Z> = idx.iter().map(|&i| region[i].clone()).collect();
            let mut learn_rng = stream.child_indexed(tags::LEARN, ballot as u64).rng();
            base.fit(&sample, &mut learn_rng)
                .map_err(|failure| VoteError::LearnerFailure {
                    ballot,
                    message: failure.message,
                })
        })
        .collect();

    let mut seen: Vec<ModelKey> = Vec::new();
    let mut retrieved = Vec::new();
    for fit in fits {
        let model = fit?;
        let key = model.key();
        if !seen.contains(&key) {
            seen.push(key);
            retrieved.push(model);
        }
    }
    Ok(retrieved)
}

/// The full two-phase procedure: retrieval, threshold choice (fixed or
/// data-driven), then the epsilon-optimality vote. The retrieved candidate
/// set and the threshold used are recorded in the output.
pub fn run_rove<Z, L, O>(
    base: &L,
    loss: &O,
    data: &SampleBatch<Z>,
    cfg: &EnsembleConfig,
    stream: RngStream,
) -> Result<EnsembleOutput<L::Model>>
where
    Z: Clone + Sync,
    L: BaseLearner<Z>,
    O: LossOracle<Z, L::Model>,
{
    let retrieved = retrieve_phase1(base, data, cfg, stream.child(tags::PHASE1))?;

    let epsilon = match cfg.epsilon {
        EpsilonMode::Fixed(eps) => eps,
        EpsilonMode::Adaptive => {
            select_epsilon(&retrieved, loss, data, cfg, stream.child(tags::EPSILON))?
        }
    };

    epsilon_vote_phase2(
        &retrieved,
        loss,
        data,
        cfg,
        epsilon,
        stream.child(tags::PHASE2),
    )
}
