//! Declarative experiment configuration: a TOML file mirroring the
//! experiment plan plus problem parameters. The schema is strict (unknown
//! keys are rejected) and hyperparameters accept a tiny formula grammar:
//! an integer, `n`, `n/b`, or `max(a, n/b)`.

use serde::Deserialize;

use crate::ensemble::EpsilonMode;
use crate::error::{Result, VoteError};
use crate::harness::{ExperimentPlan, Method, ProblemSpec, SizeRule};
use crate::problems::{EdgeWeight, MatchingParams, PortfolioParams, ResourceAllocParams};

/// Parses the size-formula grammar.
pub fn parse_size_rule(text: &str) -> Result<SizeRule> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(constant) = compact.parse::<usize>() {
        return Ok(SizeRule::Constant(constant));
    }
    if let Some(inner) = compact
        .strip_prefix("max(")
        .and_then(|rest| rest.strip_suffix(')'))
    {
        let (left, right) = inner
            .split_once(',')
            .ok_or_else(|| VoteError::Config(format!("expected max(a, n/b) in '{text}'")))?;
        let floor: usize = left.parse().map_err(|_| {
            VoteError::Config(format!("expected an integer before the comma in '{text}'"))
        })?;
        let divisor = parse_n_over(right, text)?;
        return Ok(SizeRule::MaxConstDivide(floor, divisor));
    }
    parse_n_over(&compact, text).map(SizeRule::DividedBy)
}

fn parse_n_over(term: &str, original: &str) -> Result<usize> {
    if term == "n" {
        return Ok(1);
    }
    if let Some(divisor) = term.strip_prefix("n/") {
        let value: usize = divisor
            .parse()
            .map_err(|_| VoteError::Config(format!("bad divisor in '{original}'")))?;
        if value == 0 {
            return Err(VoteError::Config(format!("zero divisor in '{original}'")));
        }
        return Ok(value);
    }
    Err(VoteError::Config(format!(
        "cannot parse size formula '{original}' (expected an integer, 'n', 'n/b', or 'max(a, n/b)')"
    )))
}

/// A size formula: either a bare integer or a formula string.
#[derive(Debug, Clone, Copy)]
pub struct SizeExpr(pub SizeRule);

impl<'de> Deserialize<'de> for SizeExpr {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Integer(i64),
            Formula(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Integer(value) => {
                if value < 1 {
                    return Err(serde::de::Error::custom(format!(
                        "size must be a positive integer, got {value}"
                    )));
                }
                Ok(SizeExpr(SizeRule::Constant(value as usize)))
            }
            Raw::Formula(text) => parse_size_rule(&text)
                .map(SizeExpr)
                .map_err(|e| serde::de::Error::custom(e.to_string())),
        }
    }
}

/// Vote threshold: a nonnegative number or the string `"adaptive"`.
#[derive(Debug, Clone, Copy)]
pub struct EpsilonExpr(pub EpsilonMode);

impl<'de> Deserialize<'de> for EpsilonExpr {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(value) if value >= 0.0 => Ok(EpsilonExpr(EpsilonMode::Fixed(value))),
            Raw::Number(value) => Err(serde::de::Error::custom(format!(
                "epsilon must be nonnegative, got {value}"
            ))),
            Raw::Text(text) if text == "adaptive" => Ok(EpsilonExpr(EpsilonMode::Adaptive)),
            Raw::Text(text) => Err(serde::de::Error::custom(format!(
                "epsilon must be a number or \"adaptive\", got '{text}'"
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentSection,
    pub problem: ProblemSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub methods: Vec<String>,
    pub n_grid: Vec<usize>,
    pub replications: u64,
    pub delta: f64,
    pub master_seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: String,
    // lp_example, regression
    pub alpha: Option<f64>,
    // resource_allocation
    pub rewards: Option<Vec<f64>>,
    pub unit_cost: Option<f64>,
    pub low_cost_quantity: Option<f64>,
    pub demand_shapes: Option<Vec<f64>>,
    // matching
    pub n_side: Option<usize>,
    pub pareto_edges: Option<Vec<[usize; 2]>>,
    pub pareto_shape: Option<f64>,
    pub constant_weight: Option<f64>,
    // portfolio
    pub assets: Option<usize>,
    pub underlying: Option<usize>,
    pub shape: Option<f64>,
    pub return_floor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub k: Option<SizeExpr>,
    pub b: Option<SizeExpr>,
    pub k1: Option<SizeExpr>,
    pub k2: Option<SizeExpr>,
    pub b1: Option<SizeExpr>,
    pub b2: Option<SizeExpr>,
    pub epsilon: Option<EpsilonExpr>,
}

impl RunConfig {
    /// Parses and schema-validates a config document. TOML errors carry
    /// line and column anchors.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|error| VoteError::Config(error.to_string()))
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        self.problem.to_spec()
    }

    /// Builds the validated experiment plan; `seed_override` replaces the
    /// config's master seed when given.
    pub fn to_plan(&self, seed_override: Option<u64>) -> Result<ExperimentPlan> {
        let mut methods = Vec::new();
        for text in &self.experiment.methods {
            let method = Method::parse(text)?;
            if methods.contains(&method) {
                return Err(VoteError::Config(format!("duplicate method '{text}'")));
            }
            methods.push(method);
        }

        let problem = self.problem_spec()?;
        let mut rule = problem.default_config_rule();
        if let Some(SizeExpr(r)) = self.ensemble.k {
            rule.k = r;
        }
        if let Some(SizeExpr(r)) = self.ensemble.b {
            rule.b = r;
        }
        if let Some(SizeExpr(r)) = self.ensemble.k1 {
            rule.k1 = r;
        }
        if let Some(SizeExpr(r)) = self.ensemble.k2 {
            rule.k2 = r;
        }
        if let Some(SizeExpr(r)) = self.ensemble.b1 {
            rule.b1 = r;
        }
        if let Some(SizeExpr(r)) = self.ensemble.b2 {
            rule.b2 = r;
        }
        if let Some(EpsilonExpr(mode)) = self.ensemble.epsilon {
            rule.epsilon = mode;
        }

        let plan = ExperimentPlan {
            problem,
            methods,
            n_grid: self.experiment.n_grid.clone(),
            replications: self.experiment.replications,
            delta: self.experiment.delta,
            config_rule: rule,
            master_seed: seed_override.unwrap_or(self.experiment.master_seed),
        };
        plan.validate()?;
        Ok(plan)
    }
}

impl ProblemSection {
    fn reject_inapplicable(&self, kind: &str, allowed: &[&str]) -> Result<()> {
        let mut present: Vec<&str> = Vec::new();
        macro_rules! check {
            ($field:ident) => {
                if self.$field.is_some() {
                    present.push(stringify!($field));
                }
            };
        }
        check!(alpha);
        check!(rewards);
        check!(unit_cost);
        check!(low_cost_quantity);
        check!(demand_shapes);
        check!(n_side);
        check!(pareto_edges);
        check!(pareto_shape);
        check!(constant_weight);
        check!(assets);
        check!(underlying);
        check!(shape);
        check!(return_floor);
        for field in present {
            if !allowed.contains(&field) {
                return Err(VoteError::Config(format!(
                    "field '{field}' does not apply to problem kind '{kind}'"
                )));
            }
        }
        Ok(())
    }

    pub fn to_spec(&self) -> Result<ProblemSpec> {
        match self.kind.as_str() {
            "constant" => {
                self.reject_inapplicable("constant", &[])?;
                Ok(ProblemSpec::Constant)
            }
            "lp_example" => {
                self.reject_inapplicable("lp_example", &["alpha"])?;
                Ok(ProblemSpec::LpExample {
                    alpha: self.alpha.unwrap_or(2.1),
                })
            }
            "regression" => {
                self.reject_inapplicable("regression", &["alpha"])?;
                Ok(ProblemSpec::Regression {
                    alpha: self.alpha.unwrap_or(2.1),
                })
            }
            "resource_allocation" => {
                self.reject_inapplicable(
                    "resource_allocation",
                    &["rewards", "unit_cost", "low_cost_quantity", "demand_shapes"],
                )?;
                let defaults = ResourceAllocParams::default_instance();
                let rewards = self.rewards.clone().unwrap_or(defaults.rewards);
                let shapes = self
                    .demand_shapes
                    .clone()
                    .unwrap_or_else(|| vec![2.1; rewards.len()]);
                let params = ResourceAllocParams::new(
                    rewards,
                    self.unit_cost.unwrap_or(defaults.unit_cost),
                    self.low_cost_quantity.unwrap_or(defaults.low_cost_quantity),
                    shapes,
                )?;
                Ok(ProblemSpec::ResourceAllocation(params))
            }
            "matching" => {
                self.reject_inapplicable(
                    "matching",
                    &["n_side", "pareto_edges", "pareto_shape", "constant_weight"],
                )?;
                match (&self.n_side, &self.pareto_edges) {
                    (None, None) => Ok(ProblemSpec::Matching(MatchingParams::default_instance())),
                    _ => {
                        let n = self.n_side.unwrap_or(5);
                        let shape = self.pareto_shape.unwrap_or(2.1);
                        let constant = self.constant_weight.unwrap_or(1.0);
                        let mut edges = vec![EdgeWeight::Constant(constant); n * n];
                        for &[i, j] in self.pareto_edges.iter().flatten() {
                            if i >= n || j >= n {
                                return Err(VoteError::Config(format!(
                                    "pareto edge [{i}, {j}] is out of range for n_side = {n}"
                                )));
                            }
                            edges[i * n + j] = EdgeWeight::Pareto(shape);
                        }
                        Ok(ProblemSpec::Matching(MatchingParams::new(n, edges)?))
                    }
                }
            }
            "portfolio" => {
                self.reject_inapplicable(
                    "portfolio",
                    &["assets", "underlying", "shape", "return_floor"],
                )?;
                let defaults = PortfolioParams::default_instance();
                let params = PortfolioParams::new(
                    self.assets.unwrap_or(defaults.assets),
                    self.underlying.unwrap_or(defaults.underlying),
                    self.shape.unwrap_or(defaults.shape),
                    self.return_floor.unwrap_or(defaults.return_floor),
                )?;
                Ok(ProblemSpec::Portfolio(params))
            }
            other => Err(VoteError::Config(format!("unknown problem kind '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[experiment]
methods = ["base", "move"]
n_grid = [200, 400]
replications = 10
delta = 0.5
master_seed = 42

[problem]
kind = "lp_example"
alpha = 2.1
"#;

    #[test]
    fn minimal_config_builds_a_plan() {
        let config = RunConfig::from_toml_str(MINIMAL).unwrap();
        let plan = config.to_plan(None).unwrap();
        assert_eq!(plan.methods, vec![Method::Base, Method::Move]);
        assert_eq!(plan.n_grid, vec![200, 400]);
        assert_eq!(plan.master_seed, 42);
        assert_eq!(plan.config_rule.k, SizeRule::MaxConstDivide(10, 200));

        let overridden = config.to_plan(Some(7)).unwrap();
        assert_eq!(overridden.master_seed, 7);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let bad = format!("{MINIMAL}\n[ensemble]\nnot_a_field = 3\n");
        let err = RunConfig::from_toml_str(&bad).unwrap_err().to_string();
        assert!(err.contains("not_a_field"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn size_formulas_parse() {
        assert_eq!(parse_size_rule("200").unwrap(), SizeRule::Constant(200));
        assert_eq!(parse_size_rule("n/50").unwrap(), SizeRule::DividedBy(50));
        assert_eq!(parse_size_rule("n").unwrap(), SizeRule::DividedBy(1));
        assert_eq!(
            parse_size_rule("max(10, n/200)").unwrap(),
            SizeRule::MaxConstDivide(10, 200)
        );
        assert_eq!(
            parse_size_rule(" max( 30 , n / 2 ) ").unwrap(),
            SizeRule::MaxConstDivide(30, 2)
        );
        assert!(parse_size_rule("min(3, n)").is_err());
        assert!(parse_size_rule("n/0").is_err());
    }

    #[test]
    fn ensemble_overrides_apply() {
        let text =
            format!("{MINIMAL}\n[ensemble]\nk = \"max(5, n/100)\"\nb = 77\nepsilon = 0.25\n");
        let config = RunConfig::from_toml_str(&text).unwrap();
        let plan = config.to_plan(None).unwrap();
        assert_eq!(plan.config_rule.k, SizeRule::MaxConstDivide(5, 100));
        assert_eq!(plan.config_rule.b, SizeRule::Constant(77));
        assert_eq!(plan.config_rule.epsilon, EpsilonMode::Fixed(0.25));
    }

    #[test]
    fn oversized_subsamples_are_named() {
        let text = MINIMAL.replace("n_grid = [200, 400]", "n_grid = [8]");
        let config = RunConfig::from_toml_str(&text).unwrap();
        let err = config.to_plan(None).unwrap_err().to_string();
        assert!(err.contains("'k'"), "{err}");
    }

    #[test]
    fn inapplicable_problem_fields_are_rejected() {
        let text = MINIMAL.replace("kind = \"lp_example\"", "kind = \"matching\"");
        let config = RunConfig::from_toml_str(&text).unwrap();
        let err = config.to_plan(None).unwrap_err().to_string();
        assert!(err.contains("'alpha'"), "{err}");
    }

    #[test]
    fn problem_kinds_resolve() {
        for (kind, extra) in [
            ("constant", ""),
            ("regression", "alpha = 2.1"),
            ("resource_allocation", "rewards = [1.0, 2.0]"),
            ("matching", ""),
            ("portfolio", "assets = 5\nunderlying = 50\nshape = 2.5"),
        ] {
            let text = MINIMAL
                .replace("kind = \"lp_example\"", &format!("kind = \"{kind}\""))
                .replace("alpha = 2.1", extra);
            let config = RunConfig::from_toml_str(&text).unwrap();
            let spec = config.problem_spec().unwrap();
            assert_eq!(spec.label(), kind);
        }
    }

    #[test]
    fn adaptive_epsilon_keyword_parses() {
        let text = format!("{MINIMAL}\n[ensemble]\nepsilon = \"adaptive\"\n");
        let config = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(
            config.to_plan(None).unwrap().config_rule.epsilon,
            EpsilonMode::Adaptive
        );
        let bad = format!("{MINIMAL}\n[ensemble]\nepsilon = \"magic\"\n");
        assert!(RunConfig::from_toml_str(&bad).is_err());
    }
}
