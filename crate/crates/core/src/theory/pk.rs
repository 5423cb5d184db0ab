//! Monte-Carlo and exact-enumeration estimators of the model selection
//! probabilities that drive the majority-vote bound.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::ensemble::{subsample_indices, BaseLearner};
use crate::error::{Result, VoteError};
use crate::model::{ModelKey, VoteModel};
use crate::rng::{tags, RngStream};
use crate::sample::SampleBatch;

/// Enumeration budget for exact subset iteration.
const ENUMERATION_BUDGET: u64 = 1_000_000;

/// Generates fresh i.i.d. batches of a requested size, one per trial.
pub trait FreshSampler<Z>: Sync {
    fn sample(&self, size: usize, stream: RngStream) -> Result<SampleBatch<Z>>;
}

impl<Z, F> FreshSampler<Z> for F
where
    F: Fn(usize, RngStream) -> Result<SampleBatch<Z>> + Sync,
{
    fn sample(&self, size: usize, stream: RngStream) -> Result<SampleBatch<Z>> {
        self(size, stream)
    }
}

/// Estimated probability of each model being output by the base learner on
/// samples of size `k`.
#[derive(Debug, Clone)]
pub struct PkTable {
    entries: BTreeMap<ModelKey, f64>,
    pub trials: u64,
    pub k: usize,
}

impl PkTable {
    pub fn new(entries: BTreeMap<ModelKey, f64>, trials: u64, k: usize) -> Self {
        Self { entries, trials, k }
    }

    pub fn get(&self, key: &ModelKey) -> f64 {
        self.entries.get(key).copied().unwrap_or(0.0)
    }

    /// Entries in ascending key order.
    pub fn entries(&self) -> impl Iterator<Item = (&ModelKey, f64)> {
        self.entries.iter().map(|(k, &p)| (k, p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_probability(&self) -> f64 {
        self.entries.values().cloned().fold(0.0, f64::max)
    }

    /// Binomial standard error of one entry.
    pub fn standard_error(&self, key: &ModelKey) -> f64 {
        let p = self.get(key);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Entries sorted by descending probability, ties by ascending key.
    pub fn sorted_desc(&self) -> Vec<(ModelKey, f64)> {
        let mut rows: Vec<(ModelKey, f64)> =
            self.entries.iter().map(|(k, &p)| (k.clone(), p)).collect();
        rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        rows
    }
}

/// Estimates `p_k` by training the base learner on `trials` independent
/// fresh samples of size `k`.
pub fn estimate_pk<Z, L, S>(
    base: &L,
    sampler: &S,
    k: usize,
    trials: u64,
    stream: RngStream,
) -> Result<PkTable>
where
    Z: Clone + Sync,
    L: BaseLearner<Z>,
    S: FreshSampler<Z>,
{
    if trials == 0 {
        return Err(VoteError::InvalidArgument("trials must be positive".into()));
    }
    let keys: Vec<Result<ModelKey>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let data = sampler.sample(k, stream.child_indexed(tags::TRIAL, trial))?;
            let mut rng = stream.child_indexed(tags::LEARN, trial).rng();
            let model =
                base.fit(data.items(), &mut rng)
                    .map_err(|failure| VoteError::LearnerFailure {
                        ballot: trial as usize,
                        message: failure.message,
                    })?;
            Ok(model.key())
        })
        .collect();

    let mut counts: BTreeMap<ModelKey, u64> = BTreeMap::new();
    for key in keys {
        *counts.entry(key?).or_insert(0) += 1;
    }
    let entries = counts
        .into_iter()
        .map(|(key, count)| (key, count as f64 / trials as f64))
        .collect();
    Ok(PkTable::new(entries, trials, k))
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut value: u128 = 1;
    for i in 0..k {
        value = value * (n - i) as u128 / (i + 1) as u128;
    }
    value
}

/// Exact subset frequencies: trains the (deterministic) base learner on all
/// `C(n, k)` subsets of the batch in lexicographic order. This is the
/// infinite-ensemble limit of the majority-vote tally.
pub fn exact_phat_enumeration<Z, L>(base: &L, data: &SampleBatch<Z>, k: usize) -> Result<PkTable>
where
    Z: Clone + Sync,
    L: BaseLearner<Z>,
{
    let n = data.len();
    if k == 0 || k > n {
        return Err(VoteError::InvalidArgument(format!(
            "subset size {k} is out of range for n = {n}"
        )));
    }
    let total = binomial(n, k);
    if total > ENUMERATION_BUDGET as u128 {
        return Err(VoteError::CombinatorialBudget {
            n,
            k,
            budget: ENUMERATION_BUDGET,
        });
    }

    let fixed_stream = RngStream::from_seed(0);
    let mut counts: BTreeMap<ModelKey, u64> = BTreeMap::new();
    let mut indices: Vec<usize> = (0..k).collect();
    let mut sample: Vec<Z> = Vec::with_capacity(k);
    loop {
        sample.clear();
        sample.extend(indices.iter().map(|&i| data[i].clone()));
        let mut rng = fixed_stream.rng();
        let model = base
            .fit(&sample, &mut rng)
            .map_err(|failure| VoteError::LearnerFailure {
                ballot: 0,
                message: failure.message,
            })?;
        *counts.entry(model.key()).or_insert(0) += 1;

        // advance to the next lexicographic combination
        let mut slot = k;
        loop {
            if slot == 0 {
                break;
            }
            slot -= 1;
            if indices[slot] != slot + n - k {
                indices[slot] += 1;
                for later in (slot + 1)..k {
                    indices[later] = indices[later - 1] + 1;
                }
                break;
            }
            if slot == 0 {
                let entries = counts
                    .into_iter()
                    .map(|(key, count)| (key, count as f64 / total as f64))
                    .collect();
                return Ok(PkTable::new(entries, total as u64, k));
            }
        }
    }
}

/// The selection-probability gap: the maximal entry minus the maximal entry
/// outside the delta-optimal set (zero when nothing lies outside).
pub fn eta_from_pk(table: &PkTable, delta_optimal: &BTreeSet<ModelKey>) -> Result<f64> {
    if delta_optimal.is_empty() {
        return Err(VoteError::InvalidArgument(
            "the delta-optimal set must be non-empty".into(),
        ));
    }
    let best = table.max_probability();
    let best_outside = table
        .entries()
        .filter(|(key, _)| !delta_optimal.contains(*key))
        .map(|(_, p)| p)
        .fold(0.0, f64::max);
    Ok(best - best_outside)
}

/// A Monte-Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub trials: u64,
}

/// Estimates `T_k(t)`: the probability that the maximal deviation between
/// empirical mean loss and true risk, over a finite model set, exceeds `t`
/// on a fresh sample of size `k`.
pub fn estimate_tk<Z, M, S>(
    loss: &impl crate::ensemble::LossOracle<Z, M>,
    models: &[(M, f64)],
    sampler: &S,
    k: usize,
    threshold: f64,
    trials: u64,
    stream: RngStream,
) -> Result<TailEstimate>
where
    Z: Clone + Sync,
    M: VoteModel,
    S: FreshSampler<Z>,
{
    if models.is_empty() || trials == 0 {
        return Err(VoteError::InvalidArgument(
            "need at least one model and one trial".into(),
        ));
    }
    let exceedances: Vec<Result<bool>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let data = sampler.sample(k, stream.child_indexed(tags::TRIAL, trial))?;
            let mut sup = 0.0f64;
            for (model, true_risk) in models {
                let mean =
                    data.iter().map(|obs| loss.loss(model, obs)).sum::<f64>() / data.len() as f64;
                sup = sup.max((mean - true_risk).abs());
            }
            Ok(sup > threshold)
        })
        .collect();

    let mut count = 0u64;
    for exceeded in exceedances {
        if exceeded? {
            count += 1;
        }
    }
    let value = count as f64 / trials as f64;
    Ok(TailEstimate {
        value,
        standard_error: (value * (1.0 - value) / trials as f64).sqrt(),
        trials,
    })
}

/// Convenience: a `FreshSampler` that subsamples a fixed batch without
/// replacement (the empirical measure of the batch).
pub struct EmpiricalSampler<Z> {
    batch: SampleBatch<Z>,
}

impl<Z: Clone> EmpiricalSampler<Z> {
    pub fn new(batch: SampleBatch<Z>) -> Self {
        Self { batch }
    }
}

impl<Z: Clone + Sync + Send> FreshSampler<Z> for EmpiricalSampler<Z> {
    fn sample(&self, size: usize, stream: RngStream) -> Result<SampleBatch<Z>> {
        let mut rng = stream.rng();
        let idx = subsample_indices(self.batch.len(), size, &mut rng)?;
        SampleBatch::new(idx.into_iter().map(|i| self.batch[i].clone()).collect())
    }
}
