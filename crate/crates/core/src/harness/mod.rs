//! Seeded replication engine: repeat dataset generation, run base and
//! ensemble methods, and estimate excess-risk tail probabilities across a
//! grid of sample sizes. Identical plans produce bitwise-identical curves
//! for any worker count.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{run_move, run_rove, EnsembleConfig, EpsilonMode};
use crate::error::{Result, VoteError};
use crate::problems::{
    gen_lp_example, gen_matching, gen_portfolio, gen_regression, gen_resource_alloc,
    lp_example_saa, lp_example_true_risk, matching_optimal_risk, matching_saa, matching_true_risk,
    portfolio_saa, regression_excess_risk, regression_ls, resource_alloc_saa, LpLoss, LpSaaLearner,
    MatchingLoss, MatchingParams, MatchingSaaLearner, PortfolioLoss, PortfolioParams,
    PortfolioSaaLearner, RegressionLoss, RegressionLsLearner, ResourceAllocParams, ResourceLoss,
    ResourceOracle, ResourceSaaLearner,
};
use crate::rng::{derive_seed, label_for, tags, RngStream};

/// Methods the harness can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// The base learner trained once on the full sample.
    Base,
    /// Majority vote over subsample-trained models.
    Move,
    /// Retrieval + epsilon-optimality vote without data splitting.
    Rove,
    /// Retrieval + epsilon-optimality vote with data splitting.
    Roves,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Base => "base",
            Method::Move => "move",
            Method::Rove => "rove",
            Method::Roves => "roves",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "base" => Ok(Method::Base),
            "move" => Ok(Method::Move),
            "rove" => Ok(Method::Rove),
            "roves" => Ok(Method::Roves),
            other => Err(VoteError::Config(format!(
                "unknown method '{other}' (expected base, move, rove, or roves)"
            ))),
        }
    }
}

/// Integer-valued hyperparameter formula evaluated at the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeRule {
    Constant(usize),
    /// `floor(n / divisor)`
    DividedBy(usize),
    /// `max(floor_value, floor(n / divisor))`
    MaxConstDivide(usize, usize),
}

impl SizeRule {
    pub fn eval(&self, n: usize) -> usize {
        match *self {
            SizeRule::Constant(c) => c,
            SizeRule::DividedBy(d) => n / d,
            SizeRule::MaxConstDivide(floor, d) => floor.max(n / d),
        }
    }
}

impl std::fmt::Display for SizeRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            SizeRule::Constant(c) => write!(f, "{c}"),
            SizeRule::DividedBy(d) => write!(f, "n/{d}"),
            SizeRule::MaxConstDivide(floor, d) => write!(f, "max({floor}, n/{d})"),
        }
    }
}

/// Hyperparameter formulas resolved into an [`EnsembleConfig`] per sample
/// size; the split flag is dictated by the method.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigRule {
    pub k: SizeRule,
    pub b: SizeRule,
    pub k1: SizeRule,
    pub k2: SizeRule,
    pub b1: SizeRule,
    pub b2: SizeRule,
    pub epsilon: EpsilonMode,
}

impl ConfigRule {
    /// Recommended defaults for discrete model spaces.
    pub fn recommended_discrete() -> Self {
        Self {
            k: SizeRule::MaxConstDivide(10, 200),
            b: SizeRule::Constant(200),
            k1: SizeRule::MaxConstDivide(10, 200),
            k2: SizeRule::MaxConstDivide(10, 200),
            b1: SizeRule::Constant(20),
            b2: SizeRule::Constant(200),
            epsilon: EpsilonMode::Adaptive,
        }
    }

    /// Recommended defaults for continuous model spaces.
    pub fn recommended_continuous() -> Self {
        Self {
            k: SizeRule::MaxConstDivide(30, 200),
            b: SizeRule::Constant(200),
            k1: SizeRule::MaxConstDivide(30, 2),
            k2: SizeRule::MaxConstDivide(30, 200),
            b1: SizeRule::Constant(50),
            b2: SizeRule::Constant(200),
            epsilon: EpsilonMode::Adaptive,
        }
    }

    pub fn config_for(&self, n: usize, split: bool) -> EnsembleConfig {
        EnsembleConfig {
            k: self.k.eval(n),
            k1: self.k1.eval(n),
            k2: self.k2.eval(n),
            b: self.b.eval(n),
            b1: self.b1.eval(n),
            b2: self.b2.eval(n),
            split,
            epsilon: self.epsilon,
        }
    }

    /// Checks every (method, n) combination, naming the offending field.
    pub fn validate(&self, methods: &[Method], n_grid: &[usize]) -> Result<()> {
        for &n in n_grid {
            for method in methods {
                match method {
                    Method::Base => {}
                    Method::Move => {
                        let k = self.k.eval(n);
                        let b = self.b.eval(n);
                        if k == 0 || k >= n {
                            return Err(VoteError::Config(format!(
                                "field 'k' = {} resolves to {k} at n = {n}; need 1 <= k < n",
                                self.k
                            )));
                        }
                        if b == 0 {
                            return Err(VoteError::Config(format!(
                                "field 'b' = {} resolves to 0 at n = {n}",
                                self.b
                            )));
                        }
                    }
                    Method::Rove | Method::Roves => {
                        let split = *method == Method::Roves;
                        let limit = if split { n / 2 } else { n.saturating_sub(1) };
                        for (name, rule) in [("k1", self.k1), ("k2", self.k2)] {
                            let value = rule.eval(n);
                            if value == 0 || value > limit {
                                return Err(VoteError::Config(format!(
                                    "field '{name}' = {rule} resolves to {value} at n = {n}; \
                                     need 1 <= {name} <= {limit} for method {}",
                                    method.label()
                                )));
                            }
                        }
                        for (name, rule) in [("b1", self.b1), ("b2", self.b2)] {
                            if rule.eval(n) == 0 {
                                return Err(VoteError::Config(format!(
                                    "field '{name}' = {rule} resolves to 0 at n = {n}"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Problem family plus parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    /// Degenerate fixture: one model, zero loss.
    Constant,
    LpExample {
        alpha: f64,
    },
    Regression {
        alpha: f64,
    },
    ResourceAllocation(ResourceAllocParams),
    Matching(MatchingParams),
    Portfolio(PortfolioParams),
    /// Test fixture: the base learner fails on every `every`-th replication.
    #[doc(hidden)]
    FaultInjection {
        every: u64,
    },
}

impl ProblemSpec {
    pub fn label(&self) -> &'static str {
        match self {
            ProblemSpec::Constant => "constant",
            ProblemSpec::LpExample { .. } => "lp_example",
            ProblemSpec::Regression { .. } => "regression",
            ProblemSpec::ResourceAllocation(_) => "resource_allocation",
            ProblemSpec::Matching(_) => "matching",
            ProblemSpec::Portfolio(_) => "portfolio",
            ProblemSpec::FaultInjection { .. } => "fault_injection",
        }
    }

    /// Discrete model spaces admit exact selection-probability tables.
    pub fn is_discrete(&self) -> bool {
        !matches!(
            self,
            ProblemSpec::Regression { .. } | ProblemSpec::Portfolio(_)
        )
    }

    pub fn default_config_rule(&self) -> ConfigRule {
        if self.is_discrete() {
            ConfigRule::recommended_discrete()
        } else {
            ConfigRule::recommended_continuous()
        }
    }
}

/// Monte-Carlo oracle provenance, recorded when true risks are estimated
/// rather than closed-form.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OracleInfo {
    pub seed: u64,
    pub draws: usize,
    pub max_standard_error: f64,
}

/// A problem bound to any precomputed oracles it needs.
pub struct ProblemContext {
    spec: ProblemSpec,
    resource_oracle: Option<ResourceOracle>,
    matching_optimum: Option<f64>,
}

impl ProblemContext {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        let resource_oracle = match &spec {
            ProblemSpec::ResourceAllocation(params) => Some(ResourceOracle::with_defaults(params)?),
            _ => None,
        };
        Self::with_resource_oracle(spec, resource_oracle)
    }

    /// Overrides the Monte-Carlo oracle (e.g. fewer draws in tests).
    pub fn with_resource_oracle(
        spec: ProblemSpec,
        resource_oracle: Option<ResourceOracle>,
    ) -> Result<Self> {
        let matching_optimum = match &spec {
            ProblemSpec::Matching(params) => Some(matching_optimal_risk(params)),
            _ => None,
        };
        Ok(Self {
            spec,
            resource_oracle,
            matching_optimum,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn oracle_info(&self) -> Option<OracleInfo> {
        self.resource_oracle.as_ref().map(|oracle| OracleInfo {
            seed: oracle.seed,
            draws: oracle.draws,
            max_standard_error: oracle.max_standard_error(),
        })
    }

    /// One replication: generate data, train with `method`, return the true
    /// excess risk of the trained model.
    pub fn run_replication(
        &self,
        method: Method,
        n: usize,
        rule: &ConfigRule,
        stream: RngStream,
    ) -> Result<f64> {
        let split = method == Method::Roves;
        let cfg = rule.config_for(n, split);
        let data_stream = stream.child(tags::DATA);
        let algo_stream = stream.child(tags::ALGO);

        match &self.spec {
            ProblemSpec::Constant => Ok(0.0),
            ProblemSpec::FaultInjection { every } => {
                if *every > 0 && stream.seed().is_multiple_of(*every) {
                    Err(VoteError::LearnerFailure {
                        ballot: 0,
                        message: "injected fault".into(),
                    })
                } else {
                    Ok(0.0)
                }
            }
            ProblemSpec::LpExample { alpha } => {
                let data = gen_lp_example(n, *alpha, data_stream)?;
                let theta = match method {
                    Method::Base => lp_example_saa(data.items()),
                    Method::Move => run_move(&LpSaaLearner, &data, &cfg, algo_stream)?.model,
                    Method::Rove | Method::Roves => {
                        run_rove(&LpSaaLearner, &LpLoss, &data, &cfg, algo_stream)?.model
                    }
                };
                Ok(lp_example_true_risk(theta))
            }
            ProblemSpec::Regression { alpha } => {
                let data = gen_regression(n, *alpha, data_stream)?;
                let theta = match method {
                    Method::Base => regression_ls(data.items()),
                    Method::Move => run_move(&RegressionLsLearner, &data, &cfg, algo_stream)?.model,
                    Method::Rove | Method::Roves => {
                        run_rove(
                            &RegressionLsLearner,
                            &RegressionLoss,
                            &data,
                            &cfg,
                            algo_stream,
                        )?
                        .model
                    }
                };
                Ok(regression_excess_risk(theta))
            }
            ProblemSpec::ResourceAllocation(params) => {
                let data = gen_resource_alloc(n, params, data_stream)?;
                let learner = ResourceSaaLearner {
                    params: params.clone(),
                };
                let loss = ResourceLoss {
                    params: params.clone(),
                };
                let theta = match method {
                    Method::Base => resource_alloc_saa(data.items(), params),
                    Method::Move => run_move(&learner, &data, &cfg, algo_stream)?.model,
                    Method::Rove | Method::Roves => {
                        run_rove(&learner, &loss, &data, &cfg, algo_stream)?.model
                    }
                };
                let oracle = self
                    .resource_oracle
                    .as_ref()
                    .expect("resource problems carry an oracle");
                Ok(oracle.true_risk(&theta) - oracle.optimal_risk())
            }
            ProblemSpec::Matching(params) => {
                let data = gen_matching(n, params, data_stream)?;
                let learner = MatchingSaaLearner {
                    params: params.clone(),
                };
                let loss = MatchingLoss {
                    n_side: params.n_side,
                };
                let theta = match method {
                    Method::Base => matching_saa(data.items(), params),
                    Method::Move => run_move(&learner, &data, &cfg, algo_stream)?.model,
                    Method::Rove | Method::Roves => {
                        run_rove(&learner, &loss, &data, &cfg, algo_stream)?.model
                    }
                };
                let optimum = self.matching_optimum.expect("cached at construction");
                Ok(matching_true_risk(&theta, params) - optimum)
            }
            ProblemSpec::Portfolio(params) => {
                let data = gen_portfolio(n, params, data_stream)?;
                let learner = PortfolioSaaLearner {
                    params: params.clone(),
                };
                let loss = PortfolioLoss {
                    mean_return: params.mean_return(),
                };
                let theta = match method {
                    Method::Base => portfolio_saa(data.items(), params).theta,
                    Method::Move => run_move(&learner, &data, &cfg, algo_stream)?.model,
                    Method::Rove | Method::Roves => {
                        run_rove(&learner, &loss, &data, &cfg, algo_stream)?.model
                    }
                };
                Ok(params.true_risk(&theta) - params.optimal_risk())
            }
        }
    }
}

/// Declarative experiment: problem, methods, sample-size grid, replication
/// count, excess-risk threshold, hyperparameter formulas, and master seed.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub problem: ProblemSpec,
    pub methods: Vec<Method>,
    pub n_grid: Vec<usize>,
    pub replications: u64,
    pub delta: f64,
    pub config_rule: ConfigRule,
    pub master_seed: u64,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(VoteError::Config("no methods selected".into()));
        }
        if self.n_grid.is_empty() {
            return Err(VoteError::Config("empty sample-size grid".into()));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(VoteError::Config(
                "sample-size grid must be strictly increasing".into(),
            ));
        }
        if self.replications == 0 {
            return Err(VoteError::Config("replications must be positive".into()));
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return Err(VoteError::Config(format!(
                "field 'delta' must be positive, got {}",
                self.delta
            )));
        }
        self.config_rule.validate(&self.methods, &self.n_grid)
    }

    /// The replication seed for (method, n, r): collision-resistant mixing
    /// of the master seed with the cell labels.
    pub fn replication_seed(&self, method: Method, n: usize, replication: u64) -> u64 {
        derive_seed(
            self.master_seed,
            &[label_for(method.label()), n as u64, replication],
        )
    }
}

/// One (method, n) cell of the tail curve.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TailCell {
    pub method: String,
    pub n: usize,
    pub replications: u64,
    pub tail: f64,
    pub tail_se: f64,
    pub mean_excess: f64,
    pub mean_se: f64,
    pub failures: u64,
}

/// Excess-risk tail estimates for every (method, n) cell.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TailCurve {
    pub problem: String,
    pub delta: f64,
    pub master_seed: u64,
    pub cells: Vec<TailCell>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleInfo>,
}

impl TailCurve {
    pub fn cell(&self, method: Method, n: usize) -> Option<&TailCell> {
        self.cells
            .iter()
            .find(|cell| cell.method == method.label() && cell.n == n)
    }
}

/// A replication that failed, with the seed needed to reproduce it.
#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub method: String,
    pub n: usize,
    pub replication: u64,
    pub seed: u64,
    pub message: String,
}

/// Non-deterministic run metadata (runtimes, failures); kept out of the
/// byte-stable results so identical plans serialize identically.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunReport {
    pub cell_seconds: Vec<(String, usize, f64)>,
    pub total_seconds: f64,
    pub failures: Vec<FailureRecord>,
}

/// Runs the full plan. Replications execute in parallel on derived seeds
/// and are reduced in replication order; failures count toward neither the
/// tail numerator nor its denominator and are reported separately.
pub fn run_tail_experiment(plan: &ExperimentPlan) -> Result<(TailCurve, RunReport)> {
    plan.validate()?;
    let context = ProblemContext::new(plan.problem.clone())?;
    run_with_context(plan, &context)
}

/// As [`run_tail_experiment`] but with a caller-supplied context (used to
/// swap in cheaper oracles for tests).
pub fn run_with_context(
    plan: &ExperimentPlan,
    context: &ProblemContext,
) -> Result<(TailCurve, RunReport)> {
    plan.validate()?;
    let started = Instant::now();
    let mut cells = Vec::new();
    let mut report = RunReport::default();

    for &method in &plan.methods {
        for &n in &plan.n_grid {
            let cell_start = Instant::now();
            let outcomes: Vec<(u64, u64, Result<f64>)> = (0..plan.replications)
                .into_par_iter()
                .map(|r| {
                    let seed = plan.replication_seed(method, n, r);
                    let excess = context.run_replication(
                        method,
                        n,
                        &plan.config_rule,
                        RngStream::from_seed(seed),
                    );
                    (r, seed, excess)
                })
                .collect();

            let mut exceedances = 0u64;
            let mut completed = 0u64;
            let mut sum = 0.0f64;
            let mut sum_squares = 0.0f64;
            for (r, seed, outcome) in outcomes {
                match outcome {
                    Ok(excess) => {
                        completed += 1;
                        sum += excess;
                        sum_squares += excess * excess;
                        if excess > plan.delta {
                            exceedances += 1;
                        }
                    }
                    Err(error) => report.failures.push(FailureRecord {
                        method: method.label().to_string(),
                        n,
                        replication: r,
                        seed,
                        message: error.to_string(),
                    }),
                }
            }

            let failures = plan.replications - completed;
            let (tail, tail_se, mean_excess, mean_se) = if completed == 0 {
                (0.0, 0.0, 0.0, 0.0)
            } else {
                let c = completed as f64;
                let tail = exceedances as f64 / c;
                let mean = sum / c;
                let variance = if completed > 1 {
                    ((sum_squares - sum * sum / c) / (c - 1.0)).max(0.0)
                } else {
                    0.0
                };
                (
                    tail,
                    (tail * (1.0 - tail) / c).sqrt(),
                    mean,
                    (variance / c).sqrt(),
                )
            };

            cells.push(TailCell {
                method: method.label().to_string(),
                n,
                replications: plan.replications,
                tail,
                tail_se,
                mean_excess,
                mean_se,
                failures,
            });
            report.cell_seconds.push((
                method.label().to_string(),
                n,
                cell_start.elapsed().as_secs_f64(),
            ));
        }
    }

    report.total_seconds = started.elapsed().as_secs_f64();
    Ok((
        TailCurve {
            problem: plan.problem.label().to_string(),
            delta: plan.delta,
            master_seed: plan.master_seed,
            cells,
            oracle: context.oracle_info(),
        },
        report,
    ))
}

/// Selection-probability table for the problem's SAA base learner on fresh
/// data of size `k`. Only defined for discrete model spaces.
pub fn problem_pk_table(
    spec: &ProblemSpec,
    k: usize,
    trials: u64,
    stream: RngStream,
) -> Result<crate::theory::PkTable> {
    use crate::theory::estimate_pk;
    if !spec.is_discrete() {
        return Err(VoteError::InvalidArgument(
            "p_k tables require discrete models".into(),
        ));
    }
    match spec {
        ProblemSpec::Constant => {
            struct ZeroLearner;
            impl crate::ensemble::BaseLearner<f64> for ZeroLearner {
                type Model = u8;
                fn fit(
                    &self,
                    _sample: &[f64],
                    _rng: &mut crate::rng::TaskRng,
                ) -> std::result::Result<u8, crate::error::LearnFailure> {
                    Ok(0)
                }
            }
            let sampler = |size: usize, _stream: RngStream| {
                crate::sample::SampleBatch::new(vec![0.0f64; size])
            };
            estimate_pk(&ZeroLearner, &sampler, k, trials, stream)
        }
        ProblemSpec::LpExample { alpha } => {
            let alpha = *alpha;
            let sampler = move |size: usize, stream: RngStream| gen_lp_example(size, alpha, stream);
            estimate_pk(&LpSaaLearner, &sampler, k, trials, stream)
        }
        ProblemSpec::ResourceAllocation(params) => {
            let learner = ResourceSaaLearner {
                params: params.clone(),
            };
            let gen_params = params.clone();
            let sampler =
                move |size: usize, stream: RngStream| gen_resource_alloc(size, &gen_params, stream);
            estimate_pk(&learner, &sampler, k, trials, stream)
        }
        ProblemSpec::Matching(params) => {
            let learner = MatchingSaaLearner {
                params: params.clone(),
            };
            let gen_params = params.clone();
            let sampler =
                move |size: usize, stream: RngStream| gen_matching(size, &gen_params, stream);
            estimate_pk(&learner, &sampler, k, trials, stream)
        }
        ProblemSpec::FaultInjection { .. } => Err(VoteError::InvalidArgument(
            "no selection probabilities for the fault-injection fixture".into(),
        )),
        ProblemSpec::Regression { .. } | ProblemSpec::Portfolio(_) => unreachable!(),
    }
}

/// Tail difference between two methods at one sample size, with the
/// combined standard error and a 3-sigma dominance flag.
#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    pub method_a: String,
    pub method_b: String,
    pub n: usize,
    pub tail_a: f64,
    pub tail_b: f64,
    pub difference: f64,
    pub combined_se: f64,
    /// True when `tail_a` undercuts `tail_b` by more than three combined
    /// standard errors.
    pub a_dominates: bool,
}

pub fn compare_methods(
    curve: &TailCurve,
    method_a: Method,
    method_b: Method,
    n: usize,
) -> Result<DominanceReport> {
    let cell = |method: Method| {
        curve.cell(method, n).ok_or(VoteError::MissingCell {
            method: method.label().to_string(),
            n,
        })
    };
    let a = cell(method_a)?;
    let b = cell(method_b)?;
    let difference = a.tail - b.tail;
    let combined_se = (a.tail_se * a.tail_se + b.tail_se * b.tail_se).sqrt();
    Ok(DominanceReport {
        method_a: a.method.clone(),
        method_b: b.method.clone(),
        n,
        tail_a: a.tail,
        tail_b: b.tail,
        difference,
        combined_se,
        a_dominates: difference < -3.0 * combined_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp_plan(methods: Vec<Method>, n_grid: Vec<usize>, replications: u64) -> ExperimentPlan {
        ExperimentPlan {
            problem: ProblemSpec::LpExample { alpha: 2.1 },
            methods,
            n_grid,
            replications,
            delta: 0.5,
            config_rule: ConfigRule::recommended_discrete(),
            master_seed: 7,
        }
    }

    #[test]
    fn single_replication_constant_problem_has_a_binary_tail() {
        let plan = ExperimentPlan {
            problem: ProblemSpec::Constant,
            methods: vec![Method::Base],
            n_grid: vec![16],
            replications: 1,
            delta: 0.5,
            config_rule: ConfigRule::recommended_discrete(),
            master_seed: 3,
        };
        let (curve, _) = run_tail_experiment(&plan).unwrap();
        let tail = curve.cells[0].tail;
        assert!(tail == 0.0 || tail == 1.0);
        assert_eq!(tail, 0.0); // zero excess risk can never exceed delta
    }

    #[test]
    fn all_four_methods_run_end_to_end() {
        let plan = ExperimentPlan {
            problem: ProblemSpec::LpExample { alpha: 2.1 },
            methods: vec![Method::Base, Method::Move, Method::Rove, Method::Roves],
            n_grid: vec![64],
            replications: 8,
            delta: 0.5,
            config_rule: ConfigRule::recommended_discrete(),
            master_seed: 21,
        };
        let (curve, report) = run_tail_experiment(&plan).unwrap();
        assert_eq!(curve.cells.len(), 4);
        assert!(report.failures.is_empty());
        for method in [Method::Base, Method::Move, Method::Rove, Method::Roves] {
            let cell = curve.cell(method, 64).unwrap();
            assert!((0.0..=1.0).contains(&cell.tail));
            assert!(cell.mean_excess >= 0.0);
        }
    }

    #[test]
    fn plan_validation_names_offending_fields() {
        let mut plan = lp_plan(vec![Method::Move], vec![8], 5);
        // k = max(10, n/200) = 10 >= n = 8
        let err = plan.validate().unwrap_err().to_string();
        assert!(err.contains("'k'"), "{err}");

        plan.n_grid = vec![64, 32];
        let err = plan.validate().unwrap_err().to_string();
        assert!(err.contains("increasing"), "{err}");

        plan.n_grid = vec![64];
        plan.delta = 0.0;
        let err = plan.validate().unwrap_err().to_string();
        assert!(err.contains("delta"), "{err}");
    }

    #[test]
    fn identical_plans_serialize_identically() {
        let plan = lp_plan(vec![Method::Base, Method::Move], vec![64, 128], 40);
        let (first, _) = run_tail_experiment(&plan).unwrap();
        let (second, _) = run_tail_experiment(&plan).unwrap();
        assert_eq!(
            serde_json::to_string(&first).unwrap(),
            serde_json::to_string(&second).unwrap()
        );
    }

    /// The base SAA tail equals the probability the sample-mean sign flips;
    /// estimate it directly and through the harness and compare at 3 SE.
    #[test]
    fn base_tail_matches_the_direct_sign_estimate() {
        let n = 128;
        let replications = 2000;
        let plan = lp_plan(vec![Method::Base], vec![n], replications);
        let (curve, _) = run_tail_experiment(&plan).unwrap();
        let cell = curve.cell(Method::Base, n).unwrap();

        let direct_trials = 4000u64;
        let mut flips = 0u64;
        for t in 0..direct_trials {
            let stream = RngStream::from_seed(derive_seed(999, &[t]));
            let data = gen_lp_example(n, 2.1, stream).unwrap();
            if lp_example_saa(data.items()) == 1 {
                flips += 1;
            }
        }
        let direct = flips as f64 / direct_trials as f64;
        let direct_se = (direct * (1.0 - direct) / direct_trials as f64).sqrt();
        let combined = (cell.tail_se.powi(2) + direct_se.powi(2)).sqrt();
        assert!(
            (cell.tail - direct).abs() <= 3.0 * combined,
            "harness {} vs direct {direct} (3se {})",
            cell.tail,
            3.0 * combined
        );
    }

    /// Closed-form sanity: the base tail is at least half the probability
    /// of a single catastrophic draw, P(z < 1 - n) / 2.
    #[test]
    fn base_tail_respects_the_single_jump_lower_bound() {
        let n = 128;
        let plan = lp_plan(vec![Method::Base], vec![n], 2000);
        let (curve, _) = run_tail_experiment(&plan).unwrap();
        let cell = curve.cell(Method::Base, n).unwrap();

        let draws = 2_000_000usize;
        let batch = gen_lp_example(draws, 2.1, RngStream::from_seed(4242)).unwrap();
        let hits = batch.iter().filter(|&&z| z < 1.0 - n as f64).count();
        let jump = hits as f64 / draws as f64;
        let jump_se = (jump * (1.0 - jump) / draws as f64).sqrt();
        assert!(
            cell.tail >= 0.5 * jump - 3.0 * (cell.tail_se + 0.5 * jump_se),
            "tail {} vs half-jump {}",
            cell.tail,
            0.5 * jump
        );
    }

    #[test]
    fn failures_are_recorded_and_excluded() {
        let plan = ExperimentPlan {
            problem: ProblemSpec::FaultInjection { every: 3 },
            methods: vec![Method::Base],
            n_grid: vec![16],
            replications: 60,
            delta: 0.5,
            config_rule: ConfigRule::recommended_discrete(),
            master_seed: 11,
        };
        let (curve, report) = run_tail_experiment(&plan).unwrap();
        let cell = &curve.cells[0];
        assert!(cell.failures > 0);
        assert_eq!(report.failures.len() as u64, cell.failures);
        assert_eq!(cell.tail, 0.0);
        for failure in &report.failures {
            assert_eq!(failure.seed % 3, 0);
            assert!(failure.message.contains("injected fault"));
        }
    }

    #[test]
    fn comparison_reports_use_the_three_sigma_rule() {
        let mut curve = TailCurve {
            problem: "scripted".into(),
            delta: 0.5,
            master_seed: 0,
            cells: Vec::new(),
            oracle: None,
        };
        let make_cell = |method: &str, tail: f64, r: f64| TailCell {
            method: method.into(),
            n: 100,
            replications: r as u64,
            tail,
            tail_se: (tail * (1.0 - tail) / r).sqrt(),
            mean_excess: tail,
            mean_se: 0.0,
            failures: 0,
        };

        // identical methods: zero difference, no dominance
        curve.cells = vec![
            make_cell("base", 0.2, 1000.0),
            make_cell("move", 0.2, 1000.0),
        ];
        let report = compare_methods(&curve, Method::Move, Method::Base, 100).unwrap();
        assert_eq!(report.difference, 0.0);
        assert!(!report.a_dominates);

        // 0.10 vs 0.30 at R = 1000: decisive
        curve.cells = vec![
            make_cell("move", 0.1, 1000.0),
            make_cell("base", 0.3, 1000.0),
        ];
        let report = compare_methods(&curve, Method::Move, Method::Base, 100).unwrap();
        assert!(report.a_dominates);

        // 0.10 vs 0.11 at R = 100: inside the noise
        curve.cells = vec![
            make_cell("move", 0.10, 100.0),
            make_cell("base", 0.11, 100.0),
        ];
        let report = compare_methods(&curve, Method::Move, Method::Base, 100).unwrap();
        assert!(!report.a_dominates);

        // missing cell
        assert!(compare_methods(&curve, Method::Rove, Method::Base, 100).is_err());
    }

    #[test]
    fn replication_seeds_are_method_and_index_specific() {
        let plan = lp_plan(vec![Method::Base], vec![64], 4);
        let a = plan.replication_seed(Method::Base, 64, 0);
        let b = plan.replication_seed(Method::Base, 64, 1);
        let c = plan.replication_seed(Method::Move, 64, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, plan.replication_seed(Method::Base, 64, 0));
    }
}
