//! On-disk layout of a run directory:
//!
//! ```text
//! manifest.json
//! trace_seed{N}.csv     t,x0..x{d-1},y,r_inst,r_cum,k_var,sigma2,C_t,saturated
//! trace_seed{N}.json    config hash, seeds, generator, objective, alpha
//! ```
//!
//! Files from a failed seed carry an extra `.partial` suffix.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::objectives::RkhsFunction;
use crate::ts_loop::{AlphaInfo, ExperimentConfig, RegretTrace, RoundRecord};

pub const MANIFEST: &str = "manifest.json";
pub const PARTIAL_SUFFIX: &str = ".partial";

pub fn trace_name(seed: u64) -> String {
    format!("trace_seed{seed}.csv")
}

pub fn meta_name(seed: u64) -> String {
    format!("trace_seed{seed}.json")
}

/// Reads and validates a config; every failure is a config error.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

/// SHA-256 of the canonical JSON form (sorted keys, defaults filled in), so
/// key order and omitted defaults in the source file do not matter.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let value = serde_json::to_value(config).expect("config serializes");
    let canonical = serde_json::to_string(&value).expect("value serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub config_hash: String,
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub generator: String,
    pub objective: RkhsFunction,
    /// Final refinement step of the located maximizer.
    pub x0_residual: f64,
    pub alpha: AlphaInfo,
    pub lambda: f64,
    pub rounds: usize,
    pub monitor_fired: Vec<usize>,
    pub worst_clipped: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TraceMeta {
    pub fn new(trace: &RegretTrace, config_hash: &str, seeds: &[u64], error: Option<String>) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            seed: trace.seed,
            seeds: seeds.to_vec(),
            generator: crate::rng::GENERATOR_NAME.to_string(),
            objective: trace.objective.clone(),
            x0_residual: trace.objective.x0_step,
            alpha: trace.alpha,
            lambda: trace.lambda,
            rounds: trace.len(),
            monitor_fired: trace.monitor_fired.clone(),
            worst_clipped: trace.worst_clipped,
            error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub seed_offset: i64,
    /// Seeds actually run, after the offset.
    pub seeds: Vec<u64>,
    /// File names relative to the run directory.
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub checks: Vec<Check>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("{}: no readable manifest ({e})", dir.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// A completed run directory with its traces rebuilt from disk.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub path: PathBuf,
    pub manifest: RunManifest,
    pub traces: Vec<RegretTrace>,
}

pub fn load_run_dir(dir: &Path) -> Result<RunDir> {
    let manifest = read_manifest(dir)?;
    let mut traces = Vec::with_capacity(manifest.seeds.len());
    for &seed in &manifest.seeds {
        let meta_path = dir.join(meta_name(seed));
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: TraceMeta = serde_json::from_str(&text)?;
        let rounds = read_trace_csv(&dir.join(trace_name(seed)), meta.objective.dim())?;
        traces.push(RegretTrace {
            seed,
            lambda: meta.lambda,
            alpha: meta.alpha,
            objective: meta.objective,
            rounds,
            monitor_fired: meta.monitor_fired,
            worst_clipped: meta.worst_clipped,
        });
    }
    Ok(RunDir {
        path: dir.to_path_buf(),
        manifest,
        traces,
    })
}

pub fn read_trace_csv(path: &Path, d: usize) -> Result<Vec<RoundRecord>> {
    let bad = |msg: String| Error::Input(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    let want = RegretTrace::csv_header(d);
    if header.iter().collect::<Vec<_>>().join(",") != want {
        return Err(bad(format!("unexpected header, want {want}")));
    }
    let mut rounds = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            row[i].parse::<f64>().map_err(|e| bad(format!("column {i}: {e}")))
        };
        rounds.push(RoundRecord {
            t: row[0].parse().map_err(|e| bad(format!("column t: {e}")))?,
            x: (1..=d).map(num).collect::<Result<_>>()?,
            y: num(d + 1)?,
            r_inst: num(d + 2)?,
            r_cum: num(d + 3)?,
            k_var: num(d + 4)?,
            sigma2: num(d + 5)?,
            c_t: num(d + 6)?,
            saturated: &row[d + 7] == "1",
        });
    }
    Ok(rounds)
}
