//! Ground-truth objectives `θ₀(x) = Σᵢ aᵢ k(x, zᵢ)` with a known RKHS norm
//! `‖θ₀‖²_k = aᵀ k(Z, Z) a` and a numerically located maximizer.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{gram_matrix, Kernel, KernelSpec, Point};
use crate::linalg::PackedCholesky;
use crate::rng::{stream, Purpose};
use crate::sequence::grid;

/// Upper bound on grid evaluations in [`locate_maximum`].
pub const MAX_GRID_POINTS: usize = 1 << 23;
/// Resampling attempts after the first when the center Gram is singular.
pub const CENTER_RETRIES: usize = 5;
/// Refinement halves the step at least this many times.
pub const MIN_REFINEMENT_PASSES: usize = 3;
/// ... and keeps halving until the step is below this.
pub const REFINEMENT_STEP: f64 = 1e-9;
/// Grid points refined independently in [`locate_maximum`].
pub const REFINEMENT_STARTS: usize = 8;

/// Anything with a point evaluation.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> Objective for F {
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RkhsFunction {
    pub kernel: KernelSpec,
    pub centers: Vec<Point>,
    pub coeffs: Vec<f64>,
    /// `‖θ₀‖_k`.
    pub norm: f64,
    pub x0: Point,
    pub value0: f64,
    /// Final refinement step around `x0`; bounds its location error.
    pub x0_step: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Maximum {
    pub x: Point,
    pub value: f64,
    pub coarse_value: f64,
    pub step: f64,
}

/// Grid resolution per axis used for `x₀` when none is given.
pub fn default_resolution(d: usize) -> usize {
    match d {
        0..=2 => 2048,
        3 => 128,
        4 => 48,
        _ => 10,
    }
}

fn norm_squared(spec: &KernelSpec, centers: &[Point], coeffs: &[f64]) -> f64 {
    let g = gram_matrix(spec, centers);
    let a = nalgebra::DVector::from_column_slice(coeffs);
    (a.transpose() * g * &a)[(0, 0)]
}

impl RkhsFunction {
    /// Builds the expansion as given (no rescaling) and locates its maximum.
    pub fn from_parts(
        kernel: KernelSpec,
        centers: Vec<Point>,
        coeffs: Vec<f64>,
        seed: u64,
        resolution: usize,
    ) -> Result<Self> {
        if centers.is_empty() || centers.len() != coeffs.len() {
            return Err(Error::Input("need matching, nonempty centers and coefficients".into()));
        }
        if coeffs.iter().all(|c| *c == 0.0) {
            return Err(Error::Input("all coefficients are zero".into()));
        }
        let n2 = norm_squared(&kernel, &centers, &coeffs);
        if !(n2 > 0.0) {
            return Err(Error::Input(format!("expansion has RKHS norm² {n2:e}")));
        }
        let mut f = Self {
            kernel,
            centers,
            coeffs,
            norm: n2.sqrt(),
            x0: Vec::new(),
            value0: f64::NAN,
            x0_step: f64::NAN,
            seed,
        };
        let m = locate_maximum(&f, resolution)?;
        f.x0 = m.x;
        f.value0 = m.value;
        f.x0_step = m.step;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn norm_squared(&self) -> f64 {
        norm_squared(&self.kernel, &self.centers, &self.coeffs)
    }

    /// `θ₀(x₀) − θ₀(x)`.
    pub fn gap(&self, x: &[f64]) -> f64 {
        self.value0 - self.value(x)
    }
}

impl Objective for RkhsFunction {
    fn value(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.coeffs)
            .map(|(z, a)| a * self.kernel.eval(x, z))
            .sum()
    }
}

/// Random expansion over `n` uniform centers with standard normal
/// coefficients, rescaled to RKHS norm `target_norm`.
pub fn synthesize_objective(
    spec: KernelSpec,
    d: usize,
    n: usize,
    seed: u64,
    target_norm: f64,
    resolution: usize,
) -> Result<RkhsFunction> {
    if n == 0 {
        return Err(Error::Config("objective needs at least one center".into()));
    }
    if !(target_norm > 0.0) || !target_norm.is_finite() {
        return Err(Error::Config(format!("target_norm must be > 0, got {target_norm}")));
    }
    spec.validate(d)?;
    for attempt in 0..=CENTER_RETRIES {
        let mut rng = stream(seed, Purpose::Objective, attempt as u64);
        let centers: Vec<Point> = (0..n).map(|_| (0..d).map(|_| rng.gen()).collect()).collect();
        let coeffs: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if PackedCholesky::factor(&gram_matrix(&spec, &centers)).is_err() {
            log::debug!("center gram singular on attempt {attempt}, resampling");
            continue;
        }
        let n2 = norm_squared(&spec, &centers, &coeffs);
        if !(n2 > 0.0) {
            continue;
        }
        let scale = target_norm / n2.sqrt();
        let coeffs = coeffs.into_iter().map(|a| a * scale).collect();
        let mut f = RkhsFunction::from_parts(spec, centers, coeffs, seed, resolution)?;
        f.norm = target_norm;
        return Ok(f);
    }
    Err(Error::Numeric(format!(
        "center gram numerically singular after {} attempts",
        CENTER_RETRIES + 1
    )))
}

pub fn evaluate_objective<F: Objective + ?Sized>(f: &F, x: &[f64]) -> f64 {
    f.value(x)
}

/// `θ₀(x) + η`, `η ~ N(0, λ)`.
pub fn observe_noisy<F: Objective + ?Sized, R: Rng + ?Sized>(
    f: &F,
    x: &[f64],
    lambda: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::Input(format!("noise variance must be >= 0, got {lambda}")));
    }
    let z: f64 = rng.sample(StandardNormal);
    Ok(f.value(x) + lambda.sqrt() * z)
}

/// Grid search at `resolution` points per axis, then compass refinement:
/// probe `±h` along each axis until no move improves, halve `h`, repeat.
pub fn locate_maximum(f: &RkhsFunction, resolution: usize) -> Result<Maximum> {
    locate_maximum_in(f, f.dim(), resolution)
}

/// [`locate_maximum`] for any objective on `[0,1]^d`.
pub fn locate_maximum_in<F: Objective + ?Sized>(f: &F, d: usize, resolution: usize) -> Result<Maximum> {
    if resolution < 10 {
        return Err(Error::Config(format!("resolution must be >= 10 per axis, got {resolution}")));
    }
    let total = (resolution as f64).powi(d as i32);
    if total > MAX_GRID_POINTS as f64 {
        return Err(Error::Config(format!(
            "grid of {resolution}^{d} points exceeds budget {MAX_GRID_POINTS}; lower the resolution"
        )));
    }
    // Keep the best few grid points so that a second peak within
    // grid-resolution error of the first still gets refined.
    let mut starts: Vec<(f64, Point)> = Vec::with_capacity(REFINEMENT_STARTS + 1);
    for p in grid(resolution, d) {
        let v = f.value(&p);
        if starts.len() < REFINEMENT_STARTS || v > starts[starts.len() - 1].0 {
            let at = starts.partition_point(|(w, _)| *w >= v);
            starts.insert(at, (v, p));
            starts.truncate(REFINEMENT_STARTS);
        }
    }
    let coarse_value = starts[0].0;
    let h0 = 1.0 / (resolution - 1) as f64;
    let mut best = (f64::NEG_INFINITY, Vec::new(), h0);
    for (v, p) in starts {
        let (v, p, h) = refine(f, p, v, h0);
        if v > best.0 {
            best = (v, p, h);
        }
    }
    let (best_v, best, h) = best;
    Ok(Maximum {
        x: best,
        value: best_v,
        coarse_value,
        step: h,
    })
}

fn refine<F: Objective + ?Sized>(f: &F, mut best: Point, mut best_v: f64, mut h: f64) -> (f64, Point, f64) {
    let d = best.len();
    let mut passes = 0;
    while passes < MIN_REFINEMENT_PASSES || h >= REFINEMENT_STEP {
        h *= 0.5;
        passes += 1;
        for _ in 0..1000 {
            let mut moved = false;
            for k in 0..d {
                for dir in [-1.0, 1.0] {
                    let mut q = best.clone();
                    q[k] = (q[k] + dir * h).clamp(0.0, 1.0);
                    let v = f.value(&q);
                    if v > best_v {
                        best_v = v;
                        best = q;
                        moved = true;
                    }
                }
            }
            if !moved {
                break;
            }
        }
    }
    (best_v, best, h)
}

impl RkhsFunction {
    /// JSON record `{kernel, centers, coeffs, norm, x0, value0, seed}` plus
    /// the refinement step.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("objective serializes")
    }
}
