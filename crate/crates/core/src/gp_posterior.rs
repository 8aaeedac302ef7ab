//! Sequential α-fractional Gaussian process posterior.
//!
//! With queried points `A_t`, observations `y` and noise variance `λ`:
//!
//! ```text
//! μ_t(x)     = k(x, A_t) (K + λI)⁻¹ y
//! k_t(x, x') = k(x, x') − k(x, A_t) (K + λI)⁻¹ k(A_t, x')
//! σ_t²(x)    = α⁻¹ k_t(x, x)
//! ```
//!
//! Tempering only rescales the covariance; the mean never depends on α.
//! The Cholesky factor of `K + λI` is extended by one row per observation.

use log::debug;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelSpec, Point};
use crate::linalg::{jitter_ladder, PackedCholesky};

pub fn validate_lambda_alpha(lambda: f64, alpha: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Config(format!("lambda must be > 0, got {lambda}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PosteriorState {
    spec: KernelSpec,
    lambda: f64,
    alpha: f64,
    points: Vec<Point>,
    obs: Vec<f64>,
    /// Factor of `K + (λ + jitter) I`.
    chol: PackedCholesky,
    /// `L⁻¹ y`, extended alongside the factor.
    whitened: Vec<f64>,
    /// `(K + λI)⁻¹ y`.
    weights: Vec<f64>,
    jitter: f64,
}

/// Output of [`PosteriorState::predict`].
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: DVector<f64>,
    /// Untempered `k_t(X, X)`.
    pub cov: DMatrix<f64>,
    /// `α⁻¹ k_t(x, x)` per probe.
    pub tempered_var: DVector<f64>,
}

/// Serializable record from which a state is rebuilt; the factor is never
/// stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosteriorSnapshot {
    pub kernel: KernelSpec,
    pub lambda: f64,
    pub alpha: f64,
    pub points: Vec<Point>,
    pub obs: Vec<f64>,
}

impl PosteriorState {
    pub fn new(spec: KernelSpec, lambda: f64, alpha: f64) -> Result<Self> {
        validate_lambda_alpha(lambda, alpha)?;
        Ok(Self {
            spec,
            lambda,
            alpha,
            points: Vec::new(),
            obs: Vec::new(),
            chol: PackedCholesky::new(),
            whitened: Vec::new(),
            weights: Vec::new(),
            jitter: 0.0,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn t(&self) -> usize {
        self.points.len()
    }
    pub fn points(&self) -> &[Point] {
        &self.points
    }
    pub fn observations(&self) -> &[f64] {
        &self.obs
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn factor(&self) -> &PackedCholesky {
        &self.chol
    }
    /// Absolute jitter currently on the diagonal (0 unless a breakdown
    /// forced escalation).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Returns a new state with one more observation.
    pub fn incorporate(&self, x: &[f64], y: f64) -> Result<Self> {
        let mut next = self.clone();
        next.push_observation(x, y)?;
        Ok(next)
    }

    /// In-place form of [`incorporate`](Self::incorporate).
    pub fn push_observation(&mut self, x: &[f64], y: f64) -> Result<()> {
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite observation".into()));
        }
        let cross: Vec<f64> = self.points.iter().map(|p| self.spec.eval(p, x)).collect();
        let diag = self.spec.eval(x, x) + self.lambda + self.jitter;
        self.points.push(x.to_vec());
        self.obs.push(y);
        match self.chol.push(&cross, diag) {
            Ok(()) => {
                let t = self.chol.len() - 1;
                let row = self.chol.row(t);
                let s: f64 = row[..t].iter().zip(&self.whitened).map(|(l, z)| l * z).sum();
                self.whitened.push((y - s) / row[t]);
                self.refresh_weights();
                Ok(())
            }
            Err(pivot) => {
                debug!("border update pivot {pivot:e} at t={}, refactoring with jitter", self.t());
                let start = self.jitter;
                match self.refactor(start) {
                    Ok(()) => Ok(()),
                    Err(e) => {
                        self.points.pop();
                        self.obs.pop();
                        Err(e)
                    }
                }
            }
        }
    }

    /// Full refactorization from the stored `(A_t, y)`; the oracle for
    /// [`incorporate`](Self::incorporate).
    pub fn rebuild(&self) -> Result<Self> {
        let mut s = Self {
            chol: PackedCholesky::new(),
            whitened: Vec::new(),
            weights: Vec::new(),
            jitter: 0.0,
            ..self.clone()
        };
        s.refactor(0.0)?;
        debug!("rebuilt posterior t={} cond(K+λI)≈{:e}", s.t(), s.condition_number());
        Ok(s)
    }

    /// Factor `K + (λ + j) I` with `j` starting at `min_jitter` and climbing
    /// the ladder on breakdown.
    fn refactor(&mut self, min_jitter: f64) -> Result<()> {
        let mut k = self.spec.gram(&self.points);
        for i in 0..k.nrows() {
            k[(i, i)] += self.lambda;
        }
        let scale = (0..k.nrows()).map(|i| k[(i, i)]).fold(0.0_f64, f64::max);
        let levels = std::iter::once(0.0).chain(jitter_ladder().map(|r| r * scale));
        for jitter in levels.filter(|j| *j >= min_jitter) {
            let mut shifted = k.clone();
            for i in 0..shifted.nrows() {
                shifted[(i, i)] += jitter;
            }
            if let Ok(chol) = PackedCholesky::factor(&shifted) {
                self.chol = chol;
                self.jitter = jitter;
                self.whitened = self.obs.clone();
                self.chol.forward_solve(&mut self.whitened);
                self.refresh_weights();
                return Ok(());
            }
        }
        Err(Error::Numeric(format!(
            "cholesky of K+λI failed at t={} after jitter escalation",
            self.t()
        )))
    }

    fn refresh_weights(&mut self) {
        self.weights = self.whitened.clone();
        self.chol.backward_solve_transpose(&mut self.weights);
    }

    /// `L⁻¹ k(A_t, x)` for each probe, as the columns of a `t × m` matrix.
    fn whitened_cross(&self, probes: &[Point]) -> DMatrix<f64> {
        let t = self.t();
        let mut v = DMatrix::zeros(t, probes.len());
        let mut col = vec![0.0; t];
        for (j, p) in probes.iter().enumerate() {
            for (c, a) in col.iter_mut().zip(&self.points) {
                *c = self.spec.eval(a, p);
            }
            self.chol.forward_solve(&mut col);
            v.column_mut(j).copy_from_slice(&col);
        }
        v
    }

    /// Posterior mean over `probes`.
    pub fn mean(&self, probes: &[Point]) -> DVector<f64> {
        DVector::from_iterator(
            probes.len(),
            probes.iter().map(|p| {
                self.points
                    .iter()
                    .zip(&self.weights)
                    .map(|(a, w)| self.spec.eval(a, p) * w)
                    .sum::<f64>()
            }),
        )
    }

    /// Mean, untempered covariance and tempered variance at `probes`.
    pub fn predict(&self, probes: &[Point]) -> Prediction {
        let mean = self.mean(probes);
        let mut cov = self.spec.gram(probes);
        if self.t() > 0 {
            let v = self.whitened_cross(probes);
            cov -= v.transpose() * &v;
            // Restore exact symmetry lost in the product.
            for i in 0..cov.nrows() {
                for j in 0..i {
                    let s = 0.5 * (cov[(i, j)] + cov[(j, i)]);
                    cov[(i, j)] = s;
                    cov[(j, i)] = s;
                }
            }
        }
        let tempered_var = DVector::from_iterator(
            probes.len(),
            (0..probes.len()).map(|i| cov[(i, i)].max(0.0) / self.alpha),
        );
        Prediction {
            mean,
            cov,
            tempered_var,
        }
    }

    /// Mean and untempered variance at a single point.
    pub fn predict_point(&self, x: &[f64]) -> (f64, f64) {
        let mut col: Vec<f64> = self.points.iter().map(|a| self.spec.eval(a, x)).collect();
        let mean = col.iter().zip(&self.weights).map(|(k, w)| k * w).sum();
        self.chol.forward_solve(&mut col);
        let var = self.spec.eval(x, x) - col.iter().map(|v| v * v).sum::<f64>();
        (mean, var.max(0.0))
    }

    /// 2-norm condition number of the factored matrix `K + λI (+ jitter)`.
    pub fn condition_number(&self) -> f64 {
        if self.t() == 0 {
            return 1.0;
        }
        let l = self.chol.to_dense();
        let ev = (&l * l.transpose()).symmetric_eigenvalues();
        ev.max() / ev.min()
    }

    pub fn snapshot(&self) -> PosteriorSnapshot {
        PosteriorSnapshot {
            kernel: self.spec,
            lambda: self.lambda,
            alpha: self.alpha,
            points: self.points.clone(),
            obs: self.obs.clone(),
        }
    }

    pub fn from_snapshot(s: &PosteriorSnapshot) -> Result<Self> {
        if s.points.len() != s.obs.len() {
            return Err(Error::Input("snapshot points/obs length mismatch".into()));
        }
        let mut st = Self::new(s.kernel, s.lambda, s.alpha)?;
        st.points = s.points.clone();
        st.obs = s.obs.clone();
        st.refactor(0.0)?;
        Ok(st)
    }
}

/// Posterior restricted to a fixed finite point set, kept as a full mean
/// vector and covariance matrix and updated by rank-one downdates when an
/// observation lands on one of the points. Costs `O(m²)` per observation
/// regardless of how many observations came before.
#[derive(Debug, Clone)]
pub struct CandidatePosterior {
    points: Vec<Point>,
    lambda: f64,
    alpha: f64,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    t: usize,
}

impl CandidatePosterior {
    pub fn prior(spec: &KernelSpec, points: Vec<Point>, lambda: f64, alpha: f64) -> Result<Self> {
        validate_lambda_alpha(lambda, alpha)?;
        let cov = spec.gram(&points);
        Ok(Self {
            mean: DVector::zeros(points.len()),
            points,
            lambda,
            alpha,
            cov,
            t: 0,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }
    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }
    /// Untempered covariance.
    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn t(&self) -> usize {
        self.t
    }

    /// Untempered variance at candidate `i`.
    pub fn var(&self, i: usize) -> f64 {
        self.cov[(i, i)].max(0.0)
    }

    /// Condition on `y` observed at candidate `index`.
    pub fn observe(&mut self, index: usize, y: f64) -> Result<()> {
        if index >= self.points.len() {
            return Err(Error::Logic(format!("candidate index {index} out of range")));
        }
        if !y.is_finite() {
            return Err(Error::Input("non-finite observation".into()));
        }
        let s = self.cov[(index, index)] + self.lambda;
        if !(s > 0.0) {
            return Err(Error::Numeric(format!("non-positive innovation variance {s:e}")));
        }
        let c = self.cov.column(index).clone_owned();
        let gain = (y - self.mean[index]) / s;
        self.mean.axpy(gain, &c, 1.0);
        self.cov.ger(-1.0 / s, &c, &c, 1.0);
        self.t += 1;
        Ok(())
    }
}

/// Untempered posterior variance on a fixed probe set, updated as points
/// are added. Keeps `L⁻¹ k(A_t, p)` for every probe, so adding a point costs
/// `O(t·P)` plus one `O(t²)` solve when the point is not itself a probe.
#[derive(Debug, Clone)]
pub struct VarianceTracker {
    spec: KernelSpec,
    lambda: f64,
    probes: Vec<Point>,
    var: Vec<f64>,
    /// `cols[s][p]` = entry `s` of `L⁻¹ k(A_t, probe_p)`.
    cols: Vec<Vec<f64>>,
    points: Vec<Point>,
    chol: PackedCholesky,
}

impl VarianceTracker {
    pub fn new(spec: KernelSpec, lambda: f64, probes: Vec<Point>) -> Result<Self> {
        validate_lambda_alpha(lambda, 1.0)?;
        let var = probes.iter().map(|p| spec.eval(p, p)).collect();
        Ok(Self {
            spec,
            lambda,
            probes,
            var,
            cols: Vec::new(),
            points: Vec::new(),
            chol: PackedCholesky::new(),
        })
    }

    pub fn t(&self) -> usize {
        self.points.len()
    }
    pub fn probes(&self) -> &[Point] {
        &self.probes
    }
    /// `k_t(p, p)` per probe.
    pub fn variances(&self) -> &[f64] {
        &self.var
    }
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Adds an arbitrary point; returns its variance before the update.
    pub fn add_point(&mut self, x: &[f64]) -> Result<f64> {
        let mut w: Vec<f64> = self.points.iter().map(|a| self.spec.eval(a, x)).collect();
        self.chol.forward_solve(&mut w);
        self.absorb(x.to_vec(), w)
    }

    /// Adds probe `i`; its whitened cross-covariances are already stored.
    pub fn add_probe(&mut self, i: usize) -> Result<f64> {
        if i >= self.probes.len() {
            return Err(Error::Logic(format!("probe index {i} out of range")));
        }
        let w: Vec<f64> = self.cols.iter().map(|c| c[i]).collect();
        self.absorb(self.probes[i].clone(), w)
    }

    fn absorb(&mut self, x: Point, w: Vec<f64>) -> Result<f64> {
        let prior = self.spec.eval(&x, &x) - w.iter().map(|v| v * v).sum::<f64>();
        let pivot = prior + self.lambda;
        if !(pivot > 0.0) {
            return Err(Error::Numeric(format!("non-positive pivot {pivot:e} in variance tracker")));
        }
        let s = pivot.sqrt();
        let mut col: Vec<f64> = self.probes.iter().map(|p| self.spec.eval(p, &x)).collect();
        for (c, ws) in self.cols.iter().zip(&w) {
            for (v, cp) in col.iter_mut().zip(c) {
                *v -= ws * cp;
            }
        }
        for (v, var) in col.iter_mut().zip(self.var.iter_mut()) {
            *v /= s;
            *var = (*var - *v * *v).max(0.0);
        }
        self.cols.push(col);
        self.chol.push_row(&w, s);
        self.points.push(x);
        Ok(prior.max(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SE1: KernelSpec = KernelSpec::SquaredExponential { a: 1.0 };

    fn probe_grid(n: usize) -> Vec<Point> {
        (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect()
    }

    #[test]
    fn prior_moments() {
        let s = PosteriorState::new(SE1, 0.1, 0.5).unwrap();
        let p = s.predict(&[vec![0.3], vec![0.9]]);
        assert_eq!(p.mean.as_slice(), &[0.0, 0.0]);
        assert_eq!(p.tempered_var.as_slice(), &[2.0, 2.0]);
        let s1 = PosteriorState::new(SE1, 0.1, 1.0).unwrap();
        assert_eq!(s1.predict(&[vec![0.3]]).tempered_var[0], 1.0);
        assert_eq!(p.cov, SE1.gram(&[vec![0.3], vec![0.9]]));
    }

    #[test]
    fn config_errors() {
        assert!(matches!(PosteriorState::new(SE1, 0.0, 0.5), Err(Error::Config(_))));
        assert!(matches!(PosteriorState::new(SE1, 1.0, 0.0), Err(Error::Config(_))));
        assert!(matches!(PosteriorState::new(SE1, 1.0, 1.5), Err(Error::Config(_))));
        assert!(PosteriorState::new(SE1, 1.0, 1.0).is_ok());
    }

    #[test]
    fn one_point_closed_form() {
        let s = PosteriorState::new(SE1, 1.0, 0.5)
            .unwrap()
            .incorporate(&[0.3], 2.0)
            .unwrap();
        assert_eq!(s.t(), 1);
        let p = s.predict(&[vec![0.3]]);
        assert!((p.mean[0] - 1.0).abs() < 1e-15);
        assert!((p.cov[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((p.tempered_var[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn near_interpolation() {
        let mut s = PosteriorState::new(SE1, 1e-8, 1.0).unwrap();
        let xs = [0.1, 0.45, 0.8];
        let ys = [0.3, -1.2, 0.7];
        for (x, y) in xs.iter().zip(ys) {
            s.push_observation(&[*x], y).unwrap();
        }
        for (x, y) in xs.iter().zip(ys) {
            let (m, v) = s.predict_point(&[*x]);
            assert!((m - y).abs() < 1e-3, "{m} vs {y}");
            assert!(v < 1e-6);
        }
    }

    #[test]
    fn factor_reproduces_regularised_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = PosteriorState::new(KernelSpec::Matern { nu: 1.5, a: 3.0 }, 0.05, 0.3).unwrap();
        for _ in 0..30 {
            s.push_observation(&[rng.gen(), rng.gen()], rng.gen()).unwrap();
        }
        let l = s.factor().to_dense();
        let mut k = s.spec().gram(s.points());
        for i in 0..k.nrows() {
            k[(i, i)] += s.lambda();
        }
        let rel = (&l * l.transpose() - &k).norm() / k.norm();
        assert!(rel < 1e-8);
    }

    #[test]
    fn incremental_matches_rebuild() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let specs = [
            SE1,
            KernelSpec::Matern { nu: 2.5, a: 2.0 },
            KernelSpec::RationalQuadratic { nu: 1.5, length_scale: 0.2 },
        ];
        let probes = probe_grid(64);
        for spec in specs {
            let mut s = PosteriorState::new(spec, 0.1, 0.4).unwrap();
            for _ in 0..20 {
                s = s.incorporate(&[rng.gen()], rng.gen_range(-2.0..2.0)).unwrap();
            }
            let r = s.rebuild().unwrap();
            let (a, b) = (s.predict(&probes), r.predict(&probes));
            assert!((a.mean - b.mean).amax() <= 1e-9);
            assert!((a.cov - b.cov).amax() <= 1e-9);
        }
    }

    #[test]
    fn empty_rebuild_is_identity() {
        let s = PosteriorState::new(SE1, 0.3, 0.7).unwrap();
        let r = s.rebuild().unwrap();
        assert_eq!(r.t(), 0);
        assert_eq!(r.snapshot(), s.snapshot());
        assert_eq!(r.condition_number(), 1.0);
    }

    #[test]
    fn variance_shrinks_monotonically_and_is_dominated_by_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let probes = probe_grid(33);
        let mut s = PosteriorState::new(KernelSpec::Matern { nu: 0.5, a: 4.0 }, 0.2, 0.25).unwrap();
        let mut prev = s.predict(&probes).cov.diagonal();
        for _ in 0..50 {
            s.push_observation(&[rng.gen()], rng.gen()).unwrap();
            let p = s.predict(&probes);
            let diag = p.cov.diagonal();
            for i in 0..probes.len() {
                assert!(diag[i] <= prev[i] + 1e-10);
                assert!(p.tempered_var[i] <= 1.0 / 0.25 + 1e-10);
                assert!(p.tempered_var[i] > 0.0);
            }
            prev = diag;
        }
    }

    #[test]
    fn tempering_only_scales_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut a = PosteriorState::new(SE1, 0.1, 0.2).unwrap();
        let mut b = PosteriorState::new(SE1, 0.1, 1.0).unwrap();
        for _ in 0..15 {
            let (x, y) = (rng.gen::<f64>(), rng.gen::<f64>());
            a.push_observation(&[x], y).unwrap();
            b.push_observation(&[x], y).unwrap();
        }
        let probes = probe_grid(20);
        let (pa, pb) = (a.predict(&probes), b.predict(&probes));
        assert_eq!(pa.mean, pb.mean);
        assert_eq!(pa.cov, pb.cov);
        for i in 0..probes.len() {
            assert_eq!(pa.tempered_var[i], pb.tempered_var[i] / 0.2);
        }
    }

    #[test]
    fn reflection_mirrors_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = KernelSpec::RationalQuadratic { nu: 2.0, length_scale: 0.3 };
        let mut a = PosteriorState::new(spec, 0.05, 0.5).unwrap();
        let mut b = PosteriorState::new(spec, 0.05, 0.5).unwrap();
        for _ in 0..12 {
            let (x, y) = (rng.gen::<f64>(), rng.gen::<f64>());
            a.push_observation(&[x], y).unwrap();
            b.push_observation(&[1.0 - x], y).unwrap();
        }
        let probes = probe_grid(41);
        let mirrored: Vec<Point> = probes.iter().map(|p| vec![1.0 - p[0]]).collect();
        let (ma, mb) = (a.mean(&probes), b.mean(&mirrored));
        assert!((ma - mb).amax() <= 1e-10);
    }

    #[test]
    fn duplicate_points_trigger_jitter() {
        let mut s = PosteriorState::new(SE1, 1e-20, 1.0).unwrap();
        s.push_observation(&[0.5], 1.0).unwrap();
        assert_eq!(s.jitter(), 0.0);
        s.push_observation(&[0.5], 1.0).unwrap();
        assert!(s.jitter() > 0.0 && s.jitter() <= 1e-6 * 2.0);
        assert_eq!(s.t(), 2);
        let (m, _) = s.predict_point(&[0.5]);
        assert!((m - 1.0).abs() < 1e-6);
    }

    #[test]
    fn snapshot_round_trip() {
        let s = PosteriorState::new(SE1, 0.1, 0.5)
            .unwrap()
            .incorporate(&[0.2], 1.0)
            .unwrap()
            .incorporate(&[0.7], -0.5)
            .unwrap();
        let json = serde_json::to_string(&s.snapshot()).unwrap();
        let back: PosteriorSnapshot = serde_json::from_str(&json).unwrap();
        let r = PosteriorState::from_snapshot(&back).unwrap();
        let probes = probe_grid(9);
        assert!((r.predict(&probes).mean - s.predict(&probes).mean).amax() < 1e-12);
    }

    #[test]
    fn candidate_posterior_tracks_full_posterior() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let spec = KernelSpec::Matern { nu: 1.5, a: 2.0 };
        let cands = probe_grid(50);
        let mut full = PosteriorState::new(spec, 0.1, 0.3).unwrap();
        let mut fixed = CandidatePosterior::prior(&spec, cands.clone(), 0.1, 0.3).unwrap();
        for _ in 0..100 {
            let i = rng.gen_range(0..cands.len());
            let y = rng.gen_range(-1.0..1.0);
            full.push_observation(&cands[i], y).unwrap();
            fixed.observe(i, y).unwrap();
        }
        let p = full.predict(&cands);
        assert!((&p.mean - fixed.mean()).amax() <= 1e-9);
        assert!((&p.cov - fixed.cov()).amax() <= 1e-9);
        assert_eq!(fixed.t(), 100);
    }
    #[test]
    fn variance_tracker_matches_predict() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spec = KernelSpec::RationalQuadratic { nu: 1.5, length_scale: 0.2 };
        let probes = probe_grid(40);
        let mut tracker = VarianceTracker::new(spec, 0.3, probes.clone()).unwrap();
        let mut full = PosteriorState::new(spec, 0.3, 1.0).unwrap();
        for step in 0..60 {
            let x = if step % 3 == 0 {
                let i = rng.gen_range(0..probes.len());
                let before = tracker.add_probe(i).unwrap();
                assert!((before - full.predict_point(&probes[i]).1).abs() < 1e-10);
                probes[i].clone()
            } else {
                let x = vec![rng.gen::<f64>()];
                let before = tracker.add_point(&x).unwrap();
                assert!((before - full.predict_point(&x).1).abs() < 1e-10);
                x
            };
            full.push_observation(&x, 0.0).unwrap();
            let want = full.predict(&probes).cov.diagonal();
            for (a, b) in tracker.variances().iter().zip(want.iter()) {
                assert!((a - b.max(0.0)).abs() < 1e-10);
            }
        }
    }
}
