use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::store::{load_run_dir, write_json, RunDir};
use crate::diagnostics::{
    cumvar_vs_gamma, fit_log_slope, greedy_gamma_curve, powers_of_two, rkhs_identity_suite, LineFit,
};
use crate::error::{Error, Result};
use crate::ts_loop::{saturation_trace, ExperimentConfig};

/// Tolerance on fitted `γ_T` exponents.
pub const GAMMA_SLOPE_TOL: f64 = 0.1;
/// Minimum R² of the SE fit `γ_T ~ (ln T)^{d+1}`.
pub const GAMMA_POLYLOG_R2: f64 = 0.98;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const IDENTITY_INSTANCES: usize = 100;
/// Greedy pool points per dimension.
pub const POOL_PER_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportMode {
    RegretSlope,
    Gamma,
    Identity,
    Saturation,
}

/// Writes the JSON summary to `out` and, for tabular modes, a CSV next to
/// it with the extension replaced.
pub fn cmd_report(mode: ReportMode, dirs: &[PathBuf], out: &Path) -> Result<serde_json::Value> {
    let (summary, table) = match mode {
        ReportMode::Identity => identity()?,
        _ => {
            if dirs.is_empty() {
                return Err(Error::Config("report needs at least one run directory".into()));
            }
            let runs = dirs.iter().map(|d| load_run_dir(d)).collect::<Result<Vec<_>>>()?;
            same_kernel(&runs)?;
            match mode {
                ReportMode::RegretSlope => regret_slope(&runs)?,
                ReportMode::Gamma => gamma(&runs)?,
                ReportMode::Saturation => saturation(&runs)?,
                ReportMode::Identity => unreachable!(),
            }
        }
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    write_json(out, &summary)?;
    if let Some(csv) = table {
        let path = out.with_extension("csv");
        fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    }
    Ok(summary)
}

fn same_kernel(runs: &[RunDir]) -> Result<()> {
    let first = &runs[0].manifest.config;
    for r in &runs[1..] {
        let c = &r.manifest.config;
        if c.kernel != first.kernel || c.dim != first.dim {
            return Err(Error::Config(format!(
                "mixed kernels: {} (d={}) in {} vs {} (d={}) in {}",
                first.kernel.name(),
                first.dim,
                runs[0].path.display(),
                c.kernel.name(),
                c.dim,
                r.path.display()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct RegretPoint {
    t: usize,
    seeds: usize,
    mean_regret: f64,
    mean_regret_over_t: f64,
}

/// One point per distinct horizon, averaging `R_T` over every seed at that
/// horizon. With a single horizon, the powers of two inside the runs are
/// used instead.
fn regret_slope(runs: &[RunDir]) -> Result<(serde_json::Value, Option<String>)> {
    let config = &runs[0].manifest.config;
    let mut by_t: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in runs {
        let t = r.manifest.config.horizon;
        by_t.entry(t)
            .or_default()
            .extend(r.traces.iter().map(|tr| tr.cumulative_regret()));
    }
    let source = if by_t.len() >= 3 { "horizons" } else { "within_run" };
    if by_t.len() < 3 {
        let t_max = *by_t.keys().max().expect("nonempty");
        by_t.clear();
        for r in runs.iter().filter(|r| r.manifest.config.horizon == t_max) {
            for tr in &r.traces {
                for t in powers_of_two(4, t_max) {
                    by_t.entry(t).or_default().push(tr.rounds[t - 1].r_cum);
                }
            }
        }
    }
    let points: Vec<RegretPoint> = by_t
        .iter()
        .map(|(&t, v)| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            RegretPoint {
                t,
                seeds: v.len(),
                mean_regret: mean,
                mean_regret_over_t: mean / t as f64,
            }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.t as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_regret).collect();
    let fit = fit_log_slope(&xs, &ys)?;
    let target = config.rate_model()?.regret_exponent();
    let tail: Vec<f64> = points.iter().rev().take(3).map(|p| p.mean_regret_over_t).collect();
    let sublinear_tail = tail.len() == 3 && tail[0] < tail[1] && tail[1] < tail[2];
    let mut csv = String::from("T,seeds,mean_regret,mean_regret_over_T\n");
    for p in &points {
        writeln!(csv, "{},{},{:.16e},{:.16e}", p.t, p.seeds, p.mean_regret, p.mean_regret_over_t).unwrap();
    }
    let summary = json!({
        "mode": "regret-slope",
        "kernel": config.kernel,
        "dim": config.dim,
        "checkpoint_source": source,
        "checkpoints": points,
        "fit": fit,
        "target": target,
        "ratio_decreasing_over_last_three": sublinear_tail,
    });
    Ok((summary, Some(csv)))
}

fn gamma(runs: &[RunDir]) -> Result<(serde_json::Value, Option<String>)> {
    let config: &ExperimentConfig = &runs[0].manifest.config;
    for r in &runs[1..] {
        let c = &r.manifest.config;
        if c.lambda != config.lambda || c.horizon != config.horizon {
            return Err(Error::Config("gamma report needs runs with equal lambda and horizon".into()));
        }
    }
    let pool = POOL_PER_DIM * config.dim;
    let curve = greedy_gamma_curve(&config.kernel, config.dim, config.lambda, config.horizon, pool, 0)?;
    let traces: Vec<_> = runs.iter().flat_map(|r| r.traces.iter().cloned()).collect();
    let cumvar = cumvar_vs_gamma(&traces, &curve)?;
    let rate = config.rate_model()?;
    let fit = match rate.gamma_exponent() {
        Some(target) => {
            // Upper half of the log range, to damp the transient.
            let k = usize::BITS - 1 - config.horizon.leading_zeros();
            let lo = 1usize << k.div_ceil(2);
            let f = curve.log_slope(lo, config.horizon)?;
            json!({
                "kind": "log_slope",
                "window": [lo, config.horizon],
                "fit": f,
                "target": target,
                "pass": (f.slope - target).abs() <= GAMMA_SLOPE_TOL,
            })
        }
        None => {
            let power = config.dim as f64 + 1.0;
            let f: LineFit = curve.polylog_fit(power, 1, config.horizon)?;
            json!({
                "kind": "polylog",
                "log_power": power,
                "fit": f,
                "pass": f.r_squared >= GAMMA_POLYLOG_R2,
            })
        }
    };
    let mut csv = Vec::new();
    cumvar.write_csv(&mut csv).map_err(|e| Error::io("csv buffer", e))?;
    let summary = json!({
        "mode": "gamma",
        "kernel": config.kernel,
        "dim": config.dim,
        "lambda": config.lambda,
        "pool": curve.pool,
        "t_max": curve.t_max(),
        "gamma_t_max": curve.gamma.last(),
        "exponent": fit,
        "cumvar": {
            "seeds": cumvar.seeds,
            "max_ratio": cumvar.max_ratio,
            "pass": cumvar.pass,
        },
    });
    Ok((summary, Some(String::from_utf8(csv).expect("ascii"))))
}

fn identity() -> Result<(serde_json::Value, Option<String>)> {
    let s = rkhs_identity_suite(IDENTITY_INSTANCES, 0)?;
    let summary = json!({
        "mode": "identity",
        "instances": s.instances,
        "max_rel_error": s.max_rel_error,
        "worst_condition": s.worst_condition,
        "tolerance": IDENTITY_TOL,
        "pass": s.max_rel_error <= IDENTITY_TOL,
    });
    Ok((summary, None))
}

fn saturation(runs: &[RunDir]) -> Result<(serde_json::Value, Option<String>)> {
    let mut csv = String::from("run,seed,t,C_t,saturated_fraction,x_t_saturated\n");
    let mut traces = 0;
    let mut optimum_saturated = Vec::new();
    let mut fired = 0;
    for (k, r) in runs.iter().enumerate() {
        let c = &r.manifest.config;
        let rate = c.rate_model()?;
        for tr in &r.traces {
            traces += 1;
            fired += tr.monitor_fired.len();
            match saturation_trace(tr, &rate, tr.alpha.alpha, c.saturation_d, c.lambda, c.probe_grid()) {
                Ok(rep) => {
                    for row in rep.rounds {
                        writeln!(
                            csv,
                            "{k},{},{},{:.16e},{:.16e},{}",
                            tr.seed,
                            row.t,
                            row.c_t,
                            row.saturated_fraction,
                            u8::from(row.x_t_saturated)
                        )
                        .unwrap();
                    }
                }
                Err(Error::Logic(msg)) => optimum_saturated.push(msg),
                Err(e) => return Err(e),
            }
        }
    }
    let pass = optimum_saturated.is_empty() && fired == 0;
    let summary = json!({
        "mode": "saturation",
        "runs": runs.iter().map(|r| r.path.display().to_string()).collect::<Vec<_>>(),
        "traces": traces,
        "optimum_cell_saturated": optimum_saturated,
        "monitor_fired_rounds": fired,
        "pass": pass,
    });
    Ok((summary, Some(csv)))
}

