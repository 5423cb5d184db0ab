//! The epsilon-optimality vote and data-driven threshold selection.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{subsample_indices, EnsembleConfig, EnsembleOutput, LossOracle, VoteTally};
use crate::error::{Result, VoteError};
use crate::model::VoteModel;
use crate::rng::{tags, RngStream};
use crate::sample::SampleBatch;

/// Memoize per-(model, observation) losses up to this many entries;
/// larger problems recompute losses per ballot.
const CACHE_LIMIT: usize = 10_000_000;

/// Per-ballot mean losses for each candidate model, the sufficient statistic
/// for both the optimality vote and the threshold search.
///
/// Row `b` holds the mean loss of every candidate on ballot `b`'s subsample.
#[derive(Debug, Clone)]
pub struct VoteCurve {
    rows: Vec<Vec<f64>>,
}

impl VoteCurve {
    /// Builds a curve from precomputed ballot rows. Every row must list one
    /// finite mean loss per candidate.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(VoteError::InvalidArgument(
                "vote curve needs at least one ballot and one model".into(),
            ));
        }
        let width = rows[0].len();
        for (b, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(VoteError::InvalidArgument(format!(
                    "ballot {b} has {} entries, expected {width}",
                    row.len()
                )));
            }
            for (m, value) in row.iter().enumerate() {
                if !value.is_finite() {
                    return Err(VoteError::NonFiniteLoss {
                        model_index: m,
                        data_index: b,
                    });
                }
            }
        }
        Ok(Self { rows })
    }

    /// Draws `cfg.b2` subsamples of size `cfg.k2` from `region` and records
    /// every candidate's mean loss per ballot. `offset` is the position of
    /// `region` within the full batch, used only for error reporting.
    pub fn sample<Z, M, O>(
        models: &[M],
        loss: &O,
        region: &[Z],
        offset: usize,
        cfg: &EnsembleConfig,
        stream: RngStream,
    ) -> Result<Self>
    where
        Z: Sync,
        M: VoteModel,
        O: LossOracle<Z, M>,
    {
        Self::sample_with_cache_limit(models, loss, region, offset, cfg, stream, CACHE_LIMIT)
    }

    fn sample_with_cache_limit<Z, M, O>(
        models: &[M],
        loss: &O,
        region: &[Z],
        offset: usize,
        cfg: &EnsembleConfig,
        stream: RngStream,
        cache_limit: usize,
    ) -> Result<Self>
    where
        Z: Sync,
        M: VoteModel,
        O: LossOracle<Z, M>,
    {
        if models.is_empty() {
            return Err(VoteError::InvalidArgument(
                "candidate set must be non-empty".into(),
            ));
        }
        if cfg.k2 > region.len() {
            return Err(VoteError::InvalidArgument(format!(
                "k2 = {} exceeds the {} observations available for voting",
                cfg.k2,
                region.len()
            )));
        }

        let cache = if models.len().saturating_mul(region.len()) <= cache_limit {
            Some(loss_cache(models, loss, region, offset)?)
        } else {
            None
        };

        let rows: Vec<Result<Vec<f64>>> = (0..cfg.b2)
            .into_par_iter()
            .map(|ballot| {
                let mut rng = stream.child_indexed(tags::SUBSAMPLE, ballot as u64).rng();
                let idx = subsample_indices(region.len(), cfg.k2, &mut rng)?;
                let mut row = Vec::with_capacity(models.len());
                match &cache {
                    Some(table) => {
                        for mi in 0..models.len() {
                            let base = mi * region.len();
                            let sum: f64 = idx.iter().map(|&j| table[base + j]).sum();
                            row.push(sum / cfg.k2 as f64);
                        }
                    }
                    None => {
                        for (mi, model) in models.iter().enumerate() {
                            let mut sum = 0.0;
                            for &j in &idx {
                                let value = loss.loss(model, &region[j]);
                                if !value.is_finite() {
                                    return Err(VoteError::NonFiniteLoss {
                                        model_index: mi,
                                        data_index: offset + j,
                                    });
                                }
                                sum += value;
                            }
                            row.push(sum / cfg.k2 as f64);
                        }
                    }
                }
                Ok(row)
            })
            .collect();

        Self::from_rows(rows.into_iter().collect::<Result<Vec<_>>>()?)
    }

    pub fn ballot_count(&self) -> usize {
        self.rows.len()
    }

    pub fn model_count(&self) -> usize {
        self.rows[0].len()
    }

    /// Ballot counts at threshold `epsilon`: every candidate within
    /// `epsilon` of its ballot's minimum receives one count per ballot.
    pub fn counts(&self, epsilon: f64) -> Vec<u64> {
        let mut counts = vec![0u64; self.model_count()];
        for row in &self.rows {
            let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
            for (count, &value) in counts.iter_mut().zip(row) {
                if value <= min + epsilon {
                    *count += 1;
                }
            }
        }
        counts
    }

    /// Maximal vote fraction over the candidates at threshold `epsilon`.
    /// Nondecreasing in `epsilon` on the fixed ballot batch.
    pub fn g(&self, epsilon: f64) -> f64 {
        let max = self.counts(epsilon).into_iter().max().unwrap_or(0);
        max as f64 / self.ballot_count() as f64
    }

    /// Largest within-ballot loss spread; `g` saturates at 1 from here on.
    pub fn spread(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| {
                let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                max - min
            })
            .fold(0.0, f64::max)
    }

    /// Smallest threshold on the binary-search grid with `g(eps) >= 1/2`.
    ///
    /// The ballot batch is fixed, so `g` is a nondecreasing step function;
    /// the search keeps `g(lo) < 1/2 <= g(hi)` and stops once the bracket
    /// width drops below `1e-6 * (1 + spread)`.
    pub fn select_epsilon(&self) -> f64 {
        if self.g(0.0) >= 0.5 {
            return 0.0;
        }
        let spread = self.spread();
        let mut lo = 0.0;
        let mut hi = spread;
        let tol = 1e-6 * (1.0 + spread);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.g(mid) >= 0.5 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

fn loss_cache<Z, M, O>(models: &[M], loss: &O, region: &[Z], offset: usize) -> Result<Vec<f64>>
where
    Z: Sync,
    M: VoteModel,
    O: LossOracle<Z, M>,
{
    let width = region.len();
    let entries: Vec<Result<Vec<f64>>> = models
        .par_iter()
        .enumerate()
        .map(|(mi, model)| {
            let mut row = Vec::with_capacity(width);
            for (j, obs) in region.iter().enumerate() {
                let value = loss.loss(model, obs);
                if !value.is_finite() {
                    return Err(VoteError::NonFiniteLoss {
                        model_index: mi,
                        data_index: offset + j,
                    });
                }
                row.push(value);
            }
            Ok(row)
        })
        .collect();

    let mut flat = Vec::with_capacity(models.len() * width);
    for row in entries {
        flat.extend_from_slice(&row?);
    }
    Ok(flat)
}

/// Chooses the vote threshold from the data: draws one dedicated batch of
/// `cfg.b2` subsamples (reused across the whole search) and returns the
/// smallest threshold whose maximal vote fraction reaches 1/2.
///
/// Under data splitting the selection subsamples come from the Phase I half.
pub fn select_epsilon<Z, M, O>(
    models: &[M],
    loss: &O,
    data: &SampleBatch<Z>,
    cfg: &EnsembleConfig,
    stream: RngStream,
) -> Result<f64>
where
    Z: Sync,
    M: VoteModel,
    O: LossOracle<Z, M>,
{
    let region = data.phase1_items(cfg.split);
    let curve = VoteCurve::sample(models, loss, region, 0, cfg, stream)?;
    Ok(curve.select_epsilon())
}

/// The epsilon-optimality vote: on each of `cfg.b2` subsamples, every
/// candidate within `epsilon` of the subsample's minimal mean loss receives
/// a count; returns the candidate with the maximal count, ties broken by
/// smallest [`crate::model::ModelKey`].
///
/// Candidates must have pairwise distinct keys (Phase I coalesces them).
pub fn epsilon_vote_phase2<Z, M, O>(
    models: &[M],
    loss: &O,
    data: &SampleBatch<Z>,
    cfg: &EnsembleConfig,
    epsilon: f64,
    stream: RngStream,
) -> Result<EnsembleOutput<M>>
where
    Z: Sync,
    M: VoteModel,
    O: LossOracle<Z, M>,
{
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(VoteError::InvalidArgument(format!(
            "epsilon must be nonnegative, got {epsilon}"
        )));
    }
    let keys: Vec<_> = models.iter().map(VoteModel::key).collect();
    {
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != keys.len() {
            return Err(VoteError::InvalidArgument(
                "candidate models must have distinct keys".into(),
            ));
        }
    }

    let offset = if cfg.split { data.split_point() } else { 0 };
    let region = data.phase2_items(cfg.split);
    let curve = VoteCurve::sample(models, loss, region, offset, cfg, stream)?;
    let counts = curve.counts(epsilon);

    let mut winner = 0usize;
    for i in 1..models.len() {
        if counts[i] > counts[winner] || (counts[i] == counts[winner] && keys[i] < keys[winner]) {
            winner = i;
        }
    }

    let tally = VoteTally::new(
        keys.iter()
            .cloned()
            .zip(counts.iter().copied())
            .collect::<BTreeMap<_, _>>(),
        cfg.b2 as u64,
    );

    Ok(EnsembleOutput {
        model: models[winner].clone(),
        key: keys[winner].clone(),
        tally,
        retrieved: Some(models.to_vec()),
        epsilon: Some(epsilon),
    })
}
