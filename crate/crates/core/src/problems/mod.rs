//! Desk-scale stochastic-optimization problems: data generators, SAA base
//! learners, loss oracles, and true-risk oracles. Maximization problems are
//! negated internally so every problem exposes a loss to minimize.

mod lp;
mod matching;
mod pareto;
mod portfolio;
mod regression;
mod resource;

pub use lp::{
    gen_lp_example, lp_example_loss, lp_example_saa, lp_example_true_risk, LpLoss, LpSaaLearner,
};
pub use matching::{
    gen_matching, matching_loss, matching_optimal_risk, matching_saa, matching_true_risk,
    max_weight_assignment, EdgeWeight, MatchingLoss, MatchingParams, MatchingSaaLearner,
};
pub use pareto::ParetoSpec;
pub use portfolio::{
    empirical_covariance, gen_portfolio, minimize_variance_pgd, portfolio_loss, portfolio_saa,
    project_simplex, quadratic_objective, PgdSolution, PortfolioLoss, PortfolioParams,
    PortfolioSaaLearner,
};
pub use regression::{
    gen_regression, regression_excess_risk, regression_loss, regression_ls, RegressionLoss,
    RegressionLsLearner, RegressionObservation,
};
pub use resource::{
    gen_resource_alloc, resource_alloc_loss, resource_alloc_saa, ResourceAllocParams, ResourceLoss,
    ResourceOracle, ResourceSaaLearner, RESOURCE_ORACLE_DRAWS, RESOURCE_ORACLE_SEED,
};
