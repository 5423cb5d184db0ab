//! End-to-end tests of the command-line interface: schemas, exit codes,
//! and printed output.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vote-ensemble"))
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const LP_CONFIG: &str = r#"
[experiment]
methods = ["base", "move"]
n_grid = [100, 200]
replications = 10
delta = 0.5
master_seed = 2024

[problem]
kind = "lp_example"
alpha = 2.1
"#;

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

#[test]
fn experiment_writes_the_declared_schema() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), LP_CONFIG);
    let out_dir = dir.path().join("out");
    let output = bin()
        .args([
            "experiment",
            "--config",
            &config,
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));

    let csv = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,n,replications,tail,tail_se,mean_excess,mean_se,failures"
    );
    assert_eq!(lines.count(), 4); // 2 methods x 2 sample sizes

    let json = std::fs::read_to_string(out_dir.join("results.json")).unwrap();
    assert!(json.contains("\"lp_example\""));
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"master_seed\": 2024"));
    assert!(manifest.contains("\"config_sha256\""));
    assert!(manifest.contains("\"artifact_version\""));
}

#[test]
fn experiment_rejects_oversized_subsamples_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &LP_CONFIG.replace("n_grid = [100, 200]", "n_grid = [8]"),
    );
    let out_dir = dir.path().join("out");
    let output = bin()
        .args([
            "experiment",
            "--config",
            &config,
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("'k'"), "{}", stderr_of(&output));
}

#[test]
fn experiment_rejects_unknown_keys_with_line_anchors() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &format!("{LP_CONFIG}\nmystery = 1\n"));
    let out_dir = dir.path().join("out");
    let output = bin()
        .args([
            "experiment",
            "--config",
            &config,
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("mystery"), "{stderr}");
    assert!(stderr.contains("line"), "{stderr}");
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), LP_CONFIG);
    let run = |out: &str, seed: Option<&str>| {
        let out_dir = dir.path().join(out);
        let mut cmd = bin();
        cmd.args([
            "experiment",
            "--config",
            &config,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        if let Some(seed) = seed {
            cmd.args(["--seed", seed]);
        }
        assert!(cmd.output().unwrap().status.success());
        (
            std::fs::read(out_dir.join("results.csv")).unwrap(),
            std::fs::read_to_string(out_dir.join("results.json")).unwrap(),
        )
    };
    let (_, default_json) = run("a", None);
    let (csv_b, json_b) = run("b", Some("555"));
    let (csv_c, json_c) = run("c", Some("555"));
    assert!(default_json.contains("\"master_seed\": 2024"));
    assert!(json_b.contains("\"master_seed\": 555"));
    assert_eq!(csv_b, csv_c);
    assert_eq!(json_b, json_c);
}

#[test]
fn bounds_prints_consistent_terms() {
    let output = bin()
        .args([
            "bounds",
            "--p-max",
            "0.9",
            "--eta",
            "0.7",
            "--n",
            "2000",
            "--k",
            "10",
            "--b",
            "200",
            "--cardinality",
            "3",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = stdout_of(&output);
    let mut terms = Vec::new();
    let mut total = None;
    for line in stdout.lines() {
        let (name, value) = line.split_once(" = ").unwrap();
        let value: f64 = value.parse().unwrap();
        if name == "total" {
            total = Some(value);
        } else {
            terms.push(value);
        }
    }
    assert_eq!(terms.len(), 4);
    let total = total.unwrap();
    let sum: f64 = terms.iter().sum();
    assert!(
        (3.0 * sum - total).abs() <= 1e-12 * total.max(1.0),
        "terms {terms:?} vs total {total}"
    );
}

#[test]
fn bounds_handles_the_degenerate_corner() {
    // p_max = eta = 1: every KL term against a degenerate reference
    // vanishes, so only the Monte-Carlo term survives.
    let output = bin()
        .args([
            "bounds",
            "--p-max",
            "1.0",
            "--eta",
            "1.0",
            "--n",
            "1000",
            "--k",
            "10",
            "--b",
            "100000",
            "--cardinality",
            "2",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = stdout_of(&output);
    assert!(stdout.contains("downward_estimation = 0"), "{stdout}");
    assert!(stdout.contains("upward_crossing = 0"), "{stdout}");
}

#[test]
fn bounds_rejects_invalid_inputs() {
    let output = bin()
        .args([
            "bounds",
            "--p-max",
            "0.5",
            "--eta",
            "0.9",
            "--n",
            "100",
            "--k",
            "10",
            "--b",
            "10",
            "--cardinality",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("eta"));
}

#[test]
fn pk_constant_problem_is_a_point_mass() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &LP_CONFIG
            .replace("kind = \"lp_example\"", "kind = \"constant\"")
            .replace("alpha = 2.1", ""),
    );
    let output = bin()
        .args([
            "pk", "--config", &config, "--k", "5", "--trials", "100", "--seed", "1",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let stdout = stdout_of(&output);
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), "model_key,p_hat,se");
    assert_eq!(lines.next().unwrap(), "00,1.00000000000e0,0");
    assert!(lines.next().is_none());
}

#[test]
fn pk_lp_rows_sum_to_one_and_match_the_direct_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), LP_CONFIG);
    let out_path = dir.path().join("pk.csv");
    let trials = 20_000u64;
    let output = bin()
        .args([
            "pk",
            "--config",
            &config,
            "--k",
            "10",
            "--trials",
            &trials.to_string(),
            "--seed",
            "9",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));

    let csv = std::fs::read_to_string(&out_path).unwrap();
    let rows: Vec<(String, f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|line| {
            let mut parts = line.split(',');
            (
                parts.next().unwrap().to_string(),
                parts.next().unwrap().parse().unwrap(),
                parts.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(rows.len(), 2, "binary model space");
    let total: f64 = rows.iter().map(|(_, p, _)| p).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(rows[0].1 >= rows[1].1, "sorted by descending p_hat");

    // direct estimate of q_10 from an independent stream
    use vote_ensemble::problems::gen_lp_example;
    use vote_ensemble::rng::{derive_seed, RngStream};
    let mut positive = 0u64;
    for t in 0..trials {
        let batch = gen_lp_example(10, 2.1, RngStream::from_seed(derive_seed(777, &[t]))).unwrap();
        if batch.iter().sum::<f64>() > 0.0 {
            positive += 1;
        }
    }
    let q = positive as f64 / trials as f64;
    let q_se = (q * (1.0 - q) / trials as f64).sqrt();
    let (p0, se0) = rows
        .iter()
        .find(|(key, _, _)| key == "00")
        .map(|(_, p, se)| (*p, *se))
        .unwrap();
    let combined = (q_se * q_se + se0 * se0).sqrt();
    assert!(
        (p0 - q).abs() <= 3.0 * combined,
        "pk row {p0} vs direct {q} (3se {})",
        3.0 * combined
    );
}

#[test]
fn worker_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), LP_CONFIG);
    let run = |out: &str, configure: &dyn Fn(&mut Command)| {
        let out_dir = dir.path().join(out);
        let mut cmd = bin();
        cmd.args([
            "experiment",
            "--config",
            &config,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        configure(&mut cmd);
        assert!(cmd.output().unwrap().status.success());
        std::fs::read(out_dir.join("results.csv")).unwrap()
    };
    let via_flag = run("flag", &|cmd| {
        cmd.args(["--workers", "1"]);
    });
    let via_env = run("env", &|cmd| {
        cmd.env("VOTE_ENSEMBLE_WORKERS", "1");
    });
    assert_eq!(via_flag, via_env);
}

/// Workflow: estimate q_k with `pk`, then feed (p_max, eta) = (q, 2q - 1)
/// into `bounds` for the binary LP model space.
#[test]
fn pk_estimates_feed_the_bounds_command() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), LP_CONFIG);
    let pk_path = dir.path().join("pk.csv");
    let output = bin()
        .args([
            "pk",
            "--config",
            &config,
            "--k",
            "10",
            "--trials",
            "20000",
            "--seed",
            "12",
            "--out",
            pk_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());

    let csv = std::fs::read_to_string(&pk_path).unwrap();
    let top = csv.lines().nth(1).unwrap();
    let q: f64 = top.split(',').nth(1).unwrap().parse().unwrap();
    assert!(q > 0.5);

    let output = bin()
        .args([
            "bounds",
            "--p-max",
            &q.to_string(),
            "--eta",
            &(2.0 * q - 1.0).to_string(),
            "--n",
            "800",
            "--k",
            "10",
            "--b",
            "200",
            "--cardinality",
            "2",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let stdout = stdout_of(&output);
    let total: f64 = stdout
        .lines()
        .find_map(|line| line.strip_prefix("total = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(total.is_finite() && total > 0.0);
}

#[test]
fn pk_rejects_continuous_problems() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &LP_CONFIG.replace("kind = \"lp_example\"", "kind = \"regression\""),
    );
    let output = bin()
        .args([
            "pk", "--config", &config, "--k", "5", "--trials", "100", "--seed", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("p_k tables require discrete models"));
}
