//! Python bindings for the vote-ensemble crate: seed derivation,
//! subsampling, the KL/bound calculators, the LP and regression example
//! pipelines, and the config-driven experiment harness.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use vote_ensemble::config::RunConfig;
use vote_ensemble::ensemble::{
    run_move as core_run_move, run_rove as core_run_rove, subsample_indices as core_subsample,
    EnsembleConfig, EpsilonMode,
};
use vote_ensemble::error::VoteError;
use vote_ensemble::harness::{problem_pk_table, run_tail_experiment};
use vote_ensemble::output::{results_csv, results_json};
use vote_ensemble::problems::{
    gen_lp_example as core_gen_lp, gen_regression as core_gen_regression, lp_example_saa,
    regression_ls as core_regression_ls, LpLoss, LpSaaLearner, RegressionLoss, RegressionLsLearner,
    RegressionObservation,
};
use vote_ensemble::rng::{derive_seed as core_derive_seed, RngStream};
use vote_ensemble::sample::SampleBatch;
use vote_ensemble::theory::{
    kl_bernoulli as core_kl, move_bound as core_move_bound, move_bound_terms, BoundInputs,
};

fn value_error(error: VoteError) -> PyErr {
    PyValueError::new_err(error.to_string())
}

/// Derive a child seed from a master seed and integer labels.
#[pyfunction]
fn derive_seed(master: u64, labels: Vec<u64>) -> u64 {
    core_derive_seed(master, &labels)
}

/// Draw k distinct indices from 0..n, uniformly over k-subsets.
#[pyfunction]
fn subsample_indices(n: usize, k: usize, seed: u64) -> PyResult<Vec<usize>> {
    let mut rng = RngStream::from_seed(seed).rng();
    core_subsample(n, k, &mut rng).map_err(value_error)
}

/// Bernoulli KL divergence D(p || q).
#[pyfunction]
fn kl_bernoulli(p: f64, q: f64) -> f64 {
    core_kl(p, q)
}

/// The four-term majority-vote tail bound.
/// Returns (total, [term1, term2, term3, term4]).
#[pyfunction]
fn move_bound(
    p_max: f64,
    eta: f64,
    n: u64,
    k: u64,
    b: u64,
    cardinality: u64,
) -> PyResult<(f64, [f64; 4])> {
    let inputs = BoundInputs::new(p_max, eta, n, k, b, cardinality).map_err(value_error)?;
    Ok((
        core_move_bound(&inputs),
        move_bound_terms(&inputs).as_array(),
    ))
}

/// Sample the heavy-tailed LP example: z = 1 + Pareto(alpha) - Pareto(alpha).
#[pyfunction]
fn gen_lp_example(n: usize, alpha: f64, seed: u64) -> PyResult<Vec<f64>> {
    core_gen_lp(n, alpha, RngStream::from_seed(seed))
        .map(|batch| batch.items().to_vec())
        .map_err(value_error)
}

/// SAA of the LP example: 1 when the sample mean is negative, else 0.
#[pyfunction]
fn lp_saa(batch: Vec<f64>) -> PyResult<u8> {
    if batch.is_empty() {
        return Err(PyValueError::new_err("batch must be non-empty"));
    }
    Ok(lp_example_saa(&batch))
}

/// Majority-vote ensemble on the LP example.
/// Returns (theta, {theta: ballot_count}).
#[pyfunction]
fn run_move_lp(
    batch: Vec<f64>,
    k: usize,
    b: usize,
    seed: u64,
) -> PyResult<(u8, std::collections::BTreeMap<u8, u64>)> {
    let data = SampleBatch::new(batch).map_err(value_error)?;
    let cfg = EnsembleConfig::for_move(k, b);
    let out = core_run_move(&LpSaaLearner, &data, &cfg, RngStream::from_seed(seed))
        .map_err(value_error)?;
    let mut counts = std::collections::BTreeMap::new();
    for theta in [0u8, 1u8] {
        use vote_ensemble::model::VoteModel;
        counts.insert(theta, out.tally.count(&theta.key()));
    }
    Ok((out.model, counts))
}

/// Retrieval + epsilon-optimality vote on the LP example.
/// `epsilon = None` selects the threshold adaptively.
/// Returns (theta, epsilon_used, retrieved_models).
#[pyfunction]
#[pyo3(signature = (batch, k1, k2, b1, b2, split, epsilon, seed))]
#[allow(clippy::too_many_arguments)]
fn run_rove_lp(
    batch: Vec<f64>,
    k1: usize,
    k2: usize,
    b1: usize,
    b2: usize,
    split: bool,
    epsilon: Option<f64>,
    seed: u64,
) -> PyResult<(u8, f64, Vec<u8>)> {
    let data = SampleBatch::new(batch).map_err(value_error)?;
    let mode = match epsilon {
        Some(eps) => EpsilonMode::Fixed(eps),
        None => EpsilonMode::Adaptive,
    };
    let cfg = EnsembleConfig::for_rove(k1, k2, b1, b2, split, mode);
    let out = core_run_rove(
        &LpSaaLearner,
        &LpLoss,
        &data,
        &cfg,
        RngStream::from_seed(seed),
    )
    .map_err(value_error)?;
    Ok((
        out.model,
        out.epsilon.unwrap_or(0.0),
        out.retrieved.unwrap_or_default(),
    ))
}

/// Sample the sign-covariate regression example. Returns (xs, ys).
#[pyfunction]
fn gen_regression(n: usize, alpha: f64, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let batch = core_gen_regression(n, alpha, RngStream::from_seed(seed)).map_err(value_error)?;
    Ok(batch.iter().map(|obs| (obs.x, obs.y)).unzip())
}

fn regression_batch(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<SampleBatch<RegressionObservation>> {
    if xs.len() != ys.len() {
        return Err(PyValueError::new_err("xs and ys must have equal length"));
    }
    SampleBatch::new(
        xs.into_iter()
            .zip(ys)
            .map(|(x, y)| RegressionObservation { x, y })
            .collect(),
    )
    .map_err(value_error)
}

/// Clamped least-squares estimate for the regression example.
#[pyfunction]
fn regression_ls(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    Ok(core_regression_ls(regression_batch(xs, ys)?.items()))
}

/// Retrieval + epsilon-optimality vote on the regression example.
/// Returns (theta, epsilon_used, retrieved_models).
#[pyfunction]
#[pyo3(signature = (xs, ys, k1, k2, b1, b2, split, epsilon, seed))]
#[allow(clippy::too_many_arguments)]
fn run_rove_regression(
    xs: Vec<f64>,
    ys: Vec<f64>,
    k1: usize,
    k2: usize,
    b1: usize,
    b2: usize,
    split: bool,
    epsilon: Option<f64>,
    seed: u64,
) -> PyResult<(f64, f64, Vec<f64>)> {
    let data = regression_batch(xs, ys)?;
    let mode = match epsilon {
        Some(eps) => EpsilonMode::Fixed(eps),
        None => EpsilonMode::Adaptive,
    };
    let cfg = EnsembleConfig::for_rove(k1, k2, b1, b2, split, mode);
    let out = core_run_rove(
        &RegressionLsLearner,
        &RegressionLoss,
        &data,
        &cfg,
        RngStream::from_seed(seed),
    )
    .map_err(value_error)?;
    Ok((
        out.model,
        out.epsilon.unwrap_or(0.0),
        out.retrieved.unwrap_or_default(),
    ))
}

/// Run a full tail experiment from a TOML config string.
/// Returns (results_csv, results_json).
#[pyfunction]
#[pyo3(signature = (config_toml, seed=None))]
fn run_experiment(config_toml: &str, seed: Option<u64>) -> PyResult<(String, String)> {
    let config = RunConfig::from_toml_str(config_toml).map_err(value_error)?;
    let plan = config.to_plan(seed).map_err(value_error)?;
    let (curve, _report) = run_tail_experiment(&plan).map_err(value_error)?;
    Ok((results_csv(&curve), results_json(&curve)))
}

/// Selection-probability table for a discrete problem config.
/// Returns rows of (model_key_hex, p_hat, se) sorted by descending p_hat.
#[pyfunction]
fn pk_table(
    config_toml: &str,
    k: usize,
    trials: u64,
    seed: u64,
) -> PyResult<Vec<(String, f64, f64)>> {
    let config = RunConfig::from_toml_str(config_toml).map_err(value_error)?;
    let spec = config.problem_spec().map_err(value_error)?;
    let table =
        problem_pk_table(&spec, k, trials, RngStream::from_seed(seed)).map_err(value_error)?;
    Ok(table
        .sorted_desc()
        .into_iter()
        .map(|(key, p)| {
            let se = table.standard_error(&key);
            (key.to_hex(), p, se)
        })
        .collect())
}

#[pymodule]
fn vote_ensemble_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    m.add_function(wrap_pyfunction!(subsample_indices, m)?)?;
    m.add_function(wrap_pyfunction!(kl_bernoulli, m)?)?;
    m.add_function(wrap_pyfunction!(move_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gen_lp_example, m)?)?;
    m.add_function(wrap_pyfunction!(lp_saa, m)?)?;
    m.add_function(wrap_pyfunction!(run_move_lp, m)?)?;
    m.add_function(wrap_pyfunction!(run_rove_lp, m)?)?;
    m.add_function(wrap_pyfunction!(gen_regression, m)?)?;
    m.add_function(wrap_pyfunction!(regression_ls, m)?)?;
    m.add_function(wrap_pyfunction!(run_rove_regression, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(pk_table, m)?)?;
    Ok(())
}
