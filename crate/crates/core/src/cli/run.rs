use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::Instant;

use log::{error, info};

use super::store::{
    config_hash, load_config, meta_name, trace_name, write_json, Check, RunManifest, TraceMeta, MANIFEST,
    PARTIAL_SUFFIX,
};
use crate::error::{Error, Result};
use crate::ts_loop::{run_gpts, RegretTrace, RunFailure};

/// Manifest of a finished run plus the first seed failure, if any.
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub failure: Option<Error>,
}

pub fn apply_seed_offset(seeds: &[u64], offset: i64) -> Result<Vec<u64>> {
    seeds
        .iter()
        .map(|&s| {
            u64::try_from(s as i128 + offset as i128)
                .map_err(|_| Error::Config(format!("seed {s} with offset {offset} leaves the u64 range")))
        })
        .collect()
}

fn write_trace(out: &Path, trace: &RegretTrace, suffix: &str) -> Result<String> {
    let name = format!("{}{suffix}", trace_name(trace.seed));
    let path = out.join(&name);
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = std::io::BufWriter::new(file);
    trace.write_csv(&mut w).map_err(|e| Error::io(&path, e))?;
    std::io::Write::flush(&mut w).map_err(|e| Error::io(&path, e))?;
    Ok(name)
}

/// Runs every seed of the config, `parallel` seeds at a time. Workers send
/// finished traces over a channel; only this thread touches the files.
pub fn cmd_run(config_path: &Path, out: &Path, parallel: usize, seed_offset: i64) -> Result<RunOutcome> {
    let started = Instant::now();
    let config = load_config(config_path)?;
    if parallel == 0 {
        return Err(Error::Config("--parallel must be >= 1".into()));
    }
    let seeds = apply_seed_offset(&config.seeds, seed_offset)?;
    let hash = config_hash(&config);
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, std::result::Result<RegretTrace, RunFailure>)>();
    let mut results: Vec<Option<std::result::Result<(), String>>> = vec![None; seeds.len()];
    let mut outputs: Vec<(usize, String)> = Vec::new();
    let mut failure: Option<Error> = None;
    let mut complete: Vec<RegretTrace> = Vec::new();

    thread::scope(|scope| -> Result<()> {
        for _ in 0..parallel.min(seeds.len()) {
            let tx = tx.clone();
            let (next, config, seeds) = (&next, &config, &seeds);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= seeds.len() {
                    break;
                }
                if tx.send((i, run_gpts(config, seeds[i]))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, result) in rx {
            let seed = seeds[i];
            match result {
                Ok(trace) => {
                    outputs.push((i, write_trace(out, &trace, "")?));
                    let meta = meta_name(seed);
                    write_json(&out.join(&meta), &TraceMeta::new(&trace, &hash, &seeds, None))?;
                    outputs.push((i, meta));
                    info!("seed {seed}: {} rounds, R_T = {}", trace.len(), trace.cumulative_regret());
                    results[i] = Some(Ok(()));
                    complete.push(trace);
                }
                Err(fail) => {
                    error!("seed {seed} failed: {fail}");
                    if let Some(partial) = &fail.partial {
                        write_trace(out, partial, PARTIAL_SUFFIX)?;
                        let meta = TraceMeta::new(partial, &hash, &seeds, Some(fail.error.to_string()));
                        write_json(&out.join(format!("{}{PARTIAL_SUFFIX}", meta_name(seed))), &meta)?;
                    }
                    results[i] = Some(Err(fail.error.to_string()));
                    failure.get_or_insert(fail.error);
                }
            }
        }
        Ok(())
    })?;

    outputs.sort();
    complete.sort_by_key(|t| t.seed);
    let failed: Vec<u64> = seeds
        .iter()
        .zip(&results)
        .filter(|(_, r)| !matches!(r, Some(Ok(()))))
        .map(|(s, _)| *s)
        .collect();
    let fired: usize = complete.iter().map(|t| t.monitor_fired.len()).sum();
    let negative = complete
        .iter()
        .flat_map(|t| &t.rounds)
        .filter(|r| r.r_inst < 0.0)
        .count();
    let checks = vec![
        Check {
            name: "all_seeds_complete".into(),
            pass: failed.is_empty(),
            detail: format!("failed seeds: {failed:?}"),
        },
        Check {
            name: "regret_nonnegative".into(),
            pass: negative == 0,
            detail: format!("{negative} negative rounds"),
        },
        Check {
            name: "monitor_silent".into(),
            pass: fired == 0,
            detail: format!("{fired} rounds with alpha (t-1) eps^2 >= 1"),
        },
    ];
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: hash,
        config,
        seed_offset,
        seeds,
        outputs: outputs.into_iter().map(|(_, n)| n).collect(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        checks,
    };
    let name = if failure.is_none() {
        MANIFEST.to_string()
    } else {
        format!("{MANIFEST}{PARTIAL_SUFFIX}")
    };
    write_json(&out.join(name), &manifest)?;
    Ok(RunOutcome { manifest, failure })
}
