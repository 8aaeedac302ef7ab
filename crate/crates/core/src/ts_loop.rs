//! The Thompson sampling loop with a tempered posterior: sample a path from
//! `GP(μ_{t-1}, α⁻¹ k_{t-1})` over the candidates, query its arg max, observe
//! a noisy reward and update. Also the post-hoc saturation report.

use std::fmt;
use std::io::Write;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp_posterior::{validate_lambda_alpha, CandidatePosterior, PosteriorState, VarianceTracker};
use crate::kernel::{distance, KernelSpec, Point};
use crate::objectives::{default_resolution, observe_noisy, synthesize_objective, Objective, RkhsFunction};
use crate::rate::{alpha_from_horizon, RateConstants, RateModel};
use crate::rng::{derive_u32, stream, Purpose};
use crate::sampler::{
    draw_from_moments, generate_candidates_within, sample_path, select_argmax, standard_normals, Generator,
    DEFAULT_MAX_CANDIDATES,
};
use crate::sequence::grid;

/// Negative regret down to this magnitude is treated as maximizer error.
pub const REGRET_CLIP: f64 = 1e-9;
pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaMode {
    Fixed { value: f64 },
    Schedule,
}

/// `fresh` draws a new candidate set every round and samples from the full
/// posterior; `fixed` keeps one set for the whole run and updates its
/// moments by rank-one corrections, which is much cheaper for long runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateMode {
    #[default]
    Fresh,
    Fixed,
}

fn default_generator() -> Generator {
    Generator::LowDiscrepancy
}
fn default_max() -> usize {
    DEFAULT_MAX_CANDIDATES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateConfig {
    #[serde(default)]
    pub mode: CandidateMode,
    #[serde(default = "default_generator")]
    pub generator: Generator,
    /// Defaults to `256·d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default = "default_max")]
    pub max: usize,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        Self {
            mode: CandidateMode::Fresh,
            generator: default_generator(),
            count: None,
            max: default_max(),
        }
    }
}

fn default_norm() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    /// Defaults to `10·d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<usize>,
    #[serde(default = "default_norm")]
    pub target_norm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    /// Share one objective across all seeds instead of drawing one per seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            centers: None,
            target_norm: default_norm(),
            resolution: None,
            seed: None,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub dim: usize,
    pub horizon: usize,
    pub lambda: f64,
    pub alpha: AlphaMode,
    /// `D` in the saturation threshold.
    #[serde(default = "one")]
    pub saturation_d: f64,
    #[serde(default)]
    pub rate: RateConstants,
    #[serde(default)]
    pub candidates: CandidateConfig,
    #[serde(default)]
    pub objective: ObjectiveConfig,
    /// Probe grid points per axis for the saturation report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_resolution: Option<usize>,
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::Config(format!("dim must be in 1..={MAX_DIM}, got {}", self.dim)));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        self.kernel.validate(self.dim)?;
        validate_lambda_alpha(self.lambda, 1.0)?;
        match self.alpha {
            AlphaMode::Fixed { value } => {
                if !(value > 0.0 && value < 1.0) {
                    return Err(Error::Config(format!("fixed alpha must lie in (0, 1), got {value}")));
                }
            }
            AlphaMode::Schedule => {
                if self.horizon < 2 {
                    return Err(Error::Config("alpha schedule needs horizon >= 2".into()));
                }
            }
        }
        if !(self.saturation_d > 0.0) || !self.saturation_d.is_finite() {
            return Err(Error::Config(format!("saturation_d must be > 0, got {}", self.saturation_d)));
        }
        RateModel::new(&self.kernel, self.dim, &self.rate)?;
        let m = self.candidate_count();
        if m == 0 || m > self.candidates.max {
            return Err(Error::Config(format!(
                "candidate count {m} outside 1..={}",
                self.candidates.max
            )));
        }
        if self.candidates.generator == Generator::Grid {
            crate::sequence::grid_side(m, self.dim)?;
        }
        if self.objective.centers == Some(0) {
            return Err(Error::Config("objective needs at least one center".into()));
        }
        if !(self.objective.target_norm > 0.0) || !self.objective.target_norm.is_finite() {
            return Err(Error::Config("objective target_norm must be > 0".into()));
        }
        if let Some(r) = self.objective.resolution {
            if r < 10 {
                return Err(Error::Config(format!("objective resolution must be >= 10, got {r}")));
            }
        }
        if self.probe_resolution.is_some_and(|r| r < 2) {
            return Err(Error::Config("probe_resolution must be >= 2".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        Ok(())
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.count.unwrap_or(256 * self.dim)
    }

    pub fn rate_model(&self) -> Result<RateModel> {
        RateModel::new(&self.kernel, self.dim, &self.rate)
    }

    pub fn resolve_alpha(&self) -> Result<AlphaInfo> {
        match self.alpha {
            AlphaMode::Fixed { value } => Ok(AlphaInfo {
                alpha: value,
                inverse_raw: None,
                clipped: false,
            }),
            AlphaMode::Schedule => {
                let s = alpha_from_horizon(&self.rate_model()?, self.horizon)?;
                Ok(AlphaInfo {
                    alpha: s.alpha,
                    inverse_raw: Some(s.inverse_raw),
                    clipped: s.clipped,
                })
            }
        }
    }

    pub fn probe_grid(&self) -> Vec<Point> {
        let side = self.probe_resolution.unwrap_or(match self.dim {
            1 => 512,
            2 => 48,
            3 => 12,
            _ => 4,
        });
        grid(side, self.dim)
    }

    pub fn objective_for(&self, seed: u64) -> Result<RkhsFunction> {
        synthesize_objective(
            self.kernel,
            self.dim,
            self.objective.centers.unwrap_or(10 * self.dim),
            self.objective.seed.unwrap_or(seed),
            self.objective.target_norm,
            self.objective.resolution.unwrap_or_else(|| default_resolution(self.dim)),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaInfo {
    pub alpha: f64,
    /// `T ε_T²` when scheduled.
    pub inverse_raw: Option<f64>,
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub x: Point,
    pub y: f64,
    pub r_inst: f64,
    pub r_cum: f64,
    /// Untempered `k_{t-1}(x_t, x_t)`.
    pub k_var: f64,
    /// `α⁻¹ k_{t-1}(x_t, x_t)`.
    pub sigma2: f64,
    pub c_t: f64,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub seed: u64,
    pub lambda: f64,
    pub alpha: AlphaInfo,
    pub objective: RkhsFunction,
    pub rounds: Vec<RoundRecord>,
    /// Rounds where `α (t−1) ε_{t−1}² ≥ 1`.
    pub monitor_fired: Vec<usize>,
    /// Most negative raw regret that was clipped to 0.
    pub worst_clipped: f64,
}

impl RegretTrace {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }
    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }
    pub fn cumulative_regret(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.r_cum)
    }
    pub fn simple_regret(&self) -> f64 {
        self.rounds.iter().map(|r| r.r_inst).fold(f64::INFINITY, f64::min)
    }
    pub fn cumulative_variance(&self) -> Vec<f64> {
        self.rounds
            .iter()
            .scan(0.0, |s, r| {
                *s += r.k_var;
                Some(*s)
            })
            .collect()
    }

    pub fn csv_header(d: usize) -> String {
        let xs: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        format!("t,{},y,r_inst,r_cum,k_var,sigma2,C_t,saturated", xs.join(","))
    }

    /// Writes the trace CSV. Floats use 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::csv_header(self.objective.dim()))?;
        for r in &self.rounds {
            write!(w, "{}", r.t)?;
            for v in r.x.iter().chain([r.y, r.r_inst, r.r_cum, r.k_var, r.sigma2, r.c_t].iter()) {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w, ",{}", u8::from(r.saturated))?;
        }
        Ok(())
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Option<Box<RegretTrace>>,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.partial {
            Some(p) => write!(f, "{} (after {} rounds)", self.error, p.len()),
            None => write!(f, "{}", self.error),
        }
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        Self { error, partial: None }
    }
}

enum Sampler {
    Fresh(PosteriorState),
    Fixed(CandidatePosterior),
}

/// Runs `config.horizon` rounds for one seed.
pub fn run_gpts(config: &ExperimentConfig, seed: u64) -> std::result::Result<RegretTrace, RunFailure> {
    config.validate()?;
    let rate = config.rate_model()?;
    let alpha = config.resolve_alpha()?;
    let objective = config.objective_for(seed)?;
    debug!(
        "seed {seed}: alpha={} x0={:?} value0={} step={:e}",
        alpha.alpha, objective.x0, objective.value0, objective.x0_step
    );
    let mut trace = RegretTrace {
        seed,
        lambda: config.lambda,
        alpha,
        objective,
        rounds: Vec::with_capacity(config.horizon),
        monitor_fired: Vec::new(),
        worst_clipped: 0.0,
    };
    match run_rounds(config, seed, &rate, &mut trace) {
        Ok(()) => Ok(trace),
        Err(error) => Err(RunFailure {
            error,
            partial: Some(Box::new(trace)),
        }),
    }
}

fn run_rounds(config: &ExperimentConfig, seed: u64, rate: &RateModel, trace: &mut RegretTrace) -> Result<()> {
    let a = trace.alpha.alpha;
    let m = config.candidate_count();
    let cands = |index: u64| {
        generate_candidates_within(
            config.dim,
            m,
            config.candidates.generator,
            derive_u32(seed, Purpose::Candidates, index),
            config.candidates.max,
        )
    };
    let mut sampler = match config.candidates.mode {
        CandidateMode::Fresh => Sampler::Fresh(PosteriorState::new(config.kernel, config.lambda, a)?),
        CandidateMode::Fixed => {
            Sampler::Fixed(CandidatePosterior::prior(&config.kernel, cands(0)?.points, config.lambda, a)?)
        }
    };
    let mut r_cum = 0.0;
    for t in 1..=config.horizon {
        let monitor = a * rate.t_eps2((t - 1) as f64);
        if monitor >= 1.0 {
            warn!("seed {seed} round {t}: alpha (t-1) eps^2 = {monitor} >= 1");
            trace.monitor_fired.push(t);
        }
        let mut rng = stream(seed, Purpose::Sampling, t as u64);
        let (x, k_var) = match &mut sampler {
            Sampler::Fresh(state) => {
                let c = cands(t as u64)?;
                let path = sample_path(state, &c, &mut rng)?;
                let i = select_argmax(path.as_slice())?;
                let x = c.points[i].clone();
                let (_, var) = state.predict_point(&x);
                (x, var.max(0.0))
            }
            Sampler::Fixed(post) => {
                let z = standard_normals(&mut rng, post.points().len());
                let path = draw_from_moments(post.mean(), post.cov(), a, &z)?;
                let i = select_argmax(path.as_slice())?;
                (post.points()[i].clone(), post.var(i))
            }
        };
        let y = observe_noisy(&trace.objective, &x, config.lambda, &mut stream(seed, Purpose::Noise, t as u64))?;
        let raw = trace.objective.gap(&x);
        let r_inst = if raw >= 0.0 {
            raw
        } else if raw >= -REGRET_CLIP {
            trace.worst_clipped = trace.worst_clipped.min(raw);
            0.0
        } else {
            return Err(Error::Numeric(format!(
                "round {t}: query beats the located maximum by {:e}",
                -raw
            )));
        };
        r_cum += r_inst;
        let sigma2 = k_var / a;
        let c_t = rate.threshold(t as f64, a, config.saturation_d);
        match &mut sampler {
            Sampler::Fresh(state) => state.push_observation(&x, y)?,
            Sampler::Fixed(post) => {
                let i = post.points().iter().position(|p| *p == x).expect("candidate index");
                post.observe(i, y)?
            }
        }
        trace.rounds.push(RoundRecord {
            t,
            saturated: raw >= 2.0 * c_t * sigma2.sqrt(),
            x,
            y,
            r_inst,
            r_cum,
            k_var,
            sigma2,
            c_t,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationRound {
    pub t: usize,
    pub c_t: f64,
    pub saturated_fraction: f64,
    pub x_t_saturated: bool,
    pub optimum_cell_saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    pub optimum_cell: Point,
    pub rounds: Vec<SaturationRound>,
}

/// Replays the queried points of `trace` and, before each round `t`, marks
/// probe `p` saturated when `θ₀(x₀) − θ₀(p) ≥ 2 C_t σ_{t−1}(p)`. The probe
/// nearest `x₀` stands for its cell and must never be saturated.
pub fn saturation_trace(
    trace: &RegretTrace,
    rate: &RateModel,
    alpha: f64,
    big_d: f64,
    lambda: f64,
    probes: Vec<Point>,
) -> Result<SaturationReport> {
    if probes.is_empty() {
        return Err(Error::Input("empty probe grid".into()));
    }
    validate_lambda_alpha(lambda, alpha)?;
    let f = &trace.objective;
    let gaps: Vec<f64> = probes.iter().map(|p| f.value0 - f.value(p)).collect();
    let cell = (0..probes.len())
        .min_by(|&i, &j| distance(&probes[i], &f.x0).total_cmp(&distance(&probes[j], &f.x0)))
        .expect("nonempty");
    let optimum_cell = probes[cell].clone();
    let mut tracker = VarianceTracker::new(f.kernel, lambda, probes)?;
    let mut rounds = Vec::with_capacity(trace.len());
    for r in &trace.rounds {
        let c_t = rate.threshold(r.t as f64, alpha, big_d);
        let saturated = |gap: f64, var: f64| gap >= 2.0 * c_t * (var / alpha).sqrt();
        let count = gaps
            .iter()
            .zip(tracker.variances())
            .filter(|(g, v)| saturated(**g, **v))
            .count();
        let optimum_cell_saturated = saturated(gaps[cell], tracker.variances()[cell]);
        let k_var = tracker.add_point(&r.x)?;
        let row = SaturationRound {
            t: r.t,
            c_t,
            saturated_fraction: count as f64 / gaps.len() as f64,
            x_t_saturated: saturated(f.gap(&r.x), k_var),
            optimum_cell_saturated,
        };
        rounds.push(row);
        if optimum_cell_saturated {
            return Err(Error::Logic(format!(
                "cell of the optimum saturated at round {} (seed {})",
                r.t, trace.seed
            )));
        }
    }
    Ok(SaturationReport { optimum_cell, rounds })
}
