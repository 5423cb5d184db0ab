use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vote_ensemble::config::RunConfig;
use vote_ensemble::error::VoteError;
use vote_ensemble::harness::{problem_pk_table, run_tail_experiment};
use vote_ensemble::output::{fmt_sig, pk_csv, write_experiment_outputs};
use vote_ensemble::rng::RngStream;
use vote_ensemble::theory::{move_bound, move_bound_terms, BoundInputs};

#[derive(Parser)]
#[command(
    name = "vote-ensemble",
    version,
    about = "Voting ensembles, tail-bound calculators, and a seeded replication harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replication experiment from a config file and write
    /// results.csv, results.json, and manifest.json.
    Experiment {
        /// Path to the TOML experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker pool size (default: logical cores; env fallback
        /// VOTE_ENSEMBLE_WORKERS).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Evaluate the majority-vote finite-sample tail bound and print each
    /// of its four terms.
    Bounds {
        #[arg(long)]
        p_max: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        cardinality: u64,
    },
    /// Estimate the base learner's model selection probabilities on fresh
    /// data and write a model_key,p_hat,se table.
    Pk {
        /// Path to a TOML config whose [problem] section names a discrete
        /// problem.
        #[arg(long)]
        config: PathBuf,
        /// Training sample size per trial.
        #[arg(long)]
        k: usize,
        /// Number of independent trials.
        #[arg(long)]
        trials: u64,
        /// Seed for the trial streams.
        #[arg(long)]
        seed: u64,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker pool size.
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn configure_workers(flag: Option<usize>) -> usize {
    let from_env = std::env::var("VOTE_ENSEMBLE_WORKERS")
        .ok()
        .and_then(|text| text.parse::<usize>().ok());
    let workers = flag.or(from_env);
    if let Some(count) = workers {
        if count >= 1 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .build_global();
            return count;
        }
    }
    rayon::current_num_threads()
}

fn exit_code_for(error: &VoteError) -> u8 {
    match error {
        VoteError::Config(_) | VoteError::InvalidArgument(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), VoteError> {
    match cli.command {
        Command::Experiment {
            config,
            out,
            seed,
            workers,
        } => {
            let worker_count = configure_workers(workers);
            let config_bytes = fs::read(&config)?;
            let text = String::from_utf8_lossy(&config_bytes);
            let parsed = RunConfig::from_toml_str(&text)?;
            let plan = parsed.to_plan(seed)?;
            let (curve, report) = run_tail_experiment(&plan)?;
            write_experiment_outputs(&out, &curve, &report, &config_bytes, worker_count)?;
            for cell in &curve.cells {
                println!(
                    "{} n={} tail={} ({} failures)",
                    cell.method,
                    cell.n,
                    fmt_sig(cell.tail),
                    cell.failures
                );
            }
            if !report.failures.is_empty() {
                eprintln!(
                    "warning: {} replication(s) failed; details in manifest.json",
                    report.failures.len()
                );
            }
            println!("results written to {}", out.display());
            Ok(())
        }
        Command::Bounds {
            p_max,
            eta,
            n,
            k,
            b,
            cardinality,
        } => {
            let inputs = BoundInputs::new(p_max, eta, n, k, b, cardinality)?;
            let terms = move_bound_terms(&inputs);
            println!("downward_crossing = {}", fmt_sig(terms.downward_crossing));
            println!(
                "downward_estimation = {}",
                fmt_sig(terms.downward_estimation)
            );
            println!("monte_carlo = {}", fmt_sig(terms.monte_carlo));
            println!("upward_crossing = {}", fmt_sig(terms.upward_crossing));
            println!("total = {}", fmt_sig(move_bound(&inputs)));
            Ok(())
        }
        Command::Pk {
            config,
            k,
            trials,
            seed,
            out,
            workers,
        } => {
            configure_workers(workers);
            let text = fs::read_to_string(&config)?;
            let parsed = RunConfig::from_toml_str(&text)?;
            let spec = parsed.problem_spec()?;
            let table = problem_pk_table(&spec, k, trials, RngStream::from_seed(seed))?;
            let csv = pk_csv(&table);
            match out {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}
