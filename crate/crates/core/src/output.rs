//! Byte-stable result serialization: fixed decimal formatting (12
//! significant digits, '.' separator, '\n' line endings) so identical runs
//! produce identical files on any worker count.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::harness::{OracleInfo, RunReport, TailCurve};
use crate::theory::PkTable;

/// Formats a float with 12 significant digits in scientific notation.
pub fn fmt_sig(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if value.is_nan() {
        return "nan".to_string();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{value:.11e}")
}

pub fn results_csv(curve: &TailCurve) -> String {
    let mut out = String::from("method,n,replications,tail,tail_se,mean_excess,mean_se,failures\n");
    for cell in &curve.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            cell.method,
            cell.n,
            cell.replications,
            fmt_sig(cell.tail),
            fmt_sig(cell.tail_se),
            fmt_sig(cell.mean_excess),
            fmt_sig(cell.mean_se),
            cell.failures,
        ));
    }
    out
}

pub fn results_json(curve: &TailCurve) -> String {
    let mut json = serde_json::to_string_pretty(curve).expect("curve serializes");
    json.push('\n');
    json
}

pub fn pk_csv(table: &PkTable) -> String {
    let mut out = String::from("model_key,p_hat,se\n");
    for (key, p) in table.sorted_desc() {
        out.push_str(&format!(
            "{},{},{}\n",
            key.to_hex(),
            fmt_sig(p),
            fmt_sig(table.standard_error(&key)),
        ));
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Everything needed to reproduce a run, plus informal runtime stats.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub master_seed: u64,
    pub config_sha256: String,
    pub workers: usize,
    pub replication_failures: u64,
    pub total_seconds: f64,
    pub cell_seconds: Vec<(String, usize, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleInfo>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn new(curve: &TailCurve, report: &RunReport, config_bytes: &[u8], workers: usize) -> Self {
        let replication_failures = report.failures.len() as u64;
        let warnings = if replication_failures > 0 {
            vec![format!(
                "{replication_failures} replication(s) failed; see failure records"
            )]
        } else {
            Vec::new()
        };
        Self {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: curve.master_seed,
            config_sha256: sha256_hex(config_bytes),
            workers,
            replication_failures,
            total_seconds: report.total_seconds,
            cell_seconds: report.cell_seconds.clone(),
            oracle: curve.oracle.clone(),
            warnings,
        }
    }
}

/// Writes results.csv, results.json, and manifest.json into `out_dir`.
pub fn write_experiment_outputs(
    out_dir: &Path,
    curve: &TailCurve,
    report: &RunReport,
    config_bytes: &[u8],
    workers: usize,
) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("results.csv"), results_csv(curve))?;
    fs::write(out_dir.join("results.json"), results_json(curve))?;
    let manifest = Manifest::new(curve, report, config_bytes, workers);
    let mut manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest_json.push('\n');
    fs::write(out_dir.join("manifest.json"), manifest_json)?;
    Ok(())
}
