//! Information gain, greedy `γ_T` curves, the cumulative-variance bound
//! `E Σ k_{t-1}(x_t, x_t) ≤ 4 γ_T`, the posterior RKHS-norm identity and
//! Gaussian Rényi divergences.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp_posterior::{validate_lambda_alpha, VarianceTracker};
use crate::kernel::{KernelSpec, Point};
use crate::linalg::cholesky_jittered;
use crate::objectives::Objective;
use crate::rng::{derive_u32, stream, Purpose};
use crate::sequence::scrambled_sobol;
use crate::ts_loop::RegretTrace;

pub use crate::fit::{fit_line, fit_log_slope, LineFit};

/// Slack allowed on the `4 γ_T` bound before a checkpoint is flagged.
pub const CUMVAR_SLACK: f64 = 0.05;

/// `½ log det(I + λ⁻¹ K)`.
pub fn information_gain(k: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    if k.nrows() != k.ncols() {
        return Err(Error::Input("gram matrix must be square".into()));
    }
    validate_lambda_alpha(lambda, 1.0)?;
    let n = k.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    let m = DMatrix::identity(n, n) + k / lambda;
    let (chol, _) = cholesky_jittered(&m)?;
    let log_det: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
    Ok((0.5 * log_det).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolInfo {
    pub generator: String,
    pub size: usize,
    pub seed: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaCurve {
    pub kernel: KernelSpec,
    pub d: usize,
    pub lambda: f64,
    pub pool: PoolInfo,
    /// `1..=T_max`.
    pub t_values: Vec<usize>,
    pub gamma: Vec<f64>,
    /// Pool indices in selection order.
    pub selected: Vec<usize>,
}

impl GammaCurve {
    pub fn t_max(&self) -> usize {
        self.t_values.len()
    }

    pub fn at(&self, t: usize) -> Option<f64> {
        if t == 0 {
            Some(0.0)
        } else {
            self.gamma.get(t - 1).copied()
        }
    }

    /// Log-log fit of `γ_T` on the powers of two in `[lo, hi]`.
    pub fn log_slope(&self, lo: usize, hi: usize) -> Result<LineFit> {
        let ts = powers_of_two(lo, hi.min(self.t_max()));
        let ys: Vec<f64> = ts.iter().map(|&t| self.gamma[t - 1]).collect();
        let xs: Vec<f64> = ts.iter().map(|&t| t as f64).collect();
        fit_log_slope(&xs, &ys)
    }

    /// Linear fit of `γ_T` on `(ln T)^p` at the powers of two in `[lo, hi]`.
    pub fn polylog_fit(&self, power: f64, lo: usize, hi: usize) -> Result<LineFit> {
        let ts = powers_of_two(lo, hi.min(self.t_max()));
        let xs: Vec<f64> = ts.iter().map(|&t| (t as f64).ln().powf(power)).collect();
        let ys: Vec<f64> = ts.iter().map(|&t| self.gamma[t - 1]).collect();
        fit_line(&xs, &ys)
    }
}

/// Powers of two in `[lo, hi]`.
pub fn powers_of_two(lo: usize, hi: usize) -> Vec<usize> {
    (0..usize::BITS)
        .map(|k| 1usize << k)
        .take_while(|&t| t <= hi)
        .filter(|&t| t >= lo)
        .collect()
}

/// Greedy surrogate for `γ_T`: repeatedly add the pool point with the
/// largest posterior variance. The gain of the selected set follows from
/// the chain rule `½ Σ log(1 + λ⁻¹ k_{t−1}(x_t, x_t))`.
pub fn greedy_gamma_curve(
    spec: &KernelSpec,
    d: usize,
    lambda: f64,
    t_max: usize,
    pool_size: usize,
    seed: u64,
) -> Result<GammaCurve> {
    if t_max == 0 {
        return Err(Error::Config("T_max must be >= 1".into()));
    }
    if pool_size < t_max {
        return Err(Error::Config(format!("pool_size {pool_size} must be >= T_max {t_max}")));
    }
    spec.validate(d)?;
    let pool_seed = derive_u32(seed, Purpose::Diagnostics, 0);
    let pool = scrambled_sobol(pool_size, d, pool_seed)?;
    let mut tracker = VarianceTracker::new(*spec, lambda, pool)?;
    let mut gain = 0.0;
    let mut gamma = Vec::with_capacity(t_max);
    let mut selected = Vec::with_capacity(t_max);
    for _ in 0..t_max {
        let var = tracker.variances();
        let mut best = 0;
        for (i, v) in var.iter().enumerate() {
            if *v > var[best] {
                best = i;
            }
        }
        let v = tracker.add_probe(best)?;
        gain += 0.5 * (v / lambda).ln_1p();
        gamma.push(gain);
        selected.push(best);
    }
    Ok(GammaCurve {
        kernel: *spec,
        d,
        lambda,
        pool: PoolInfo {
            generator: "scrambled_sobol".into(),
            size: pool_size,
            seed: pool_seed,
        },
        t_values: (1..=t_max).collect(),
        gamma,
        selected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumvarRow {
    pub t: usize,
    pub gamma: f64,
    /// Seed-averaged `Σ_{s≤t} k_{s−1}(x_s, x_s)`.
    pub cumvar: f64,
    /// `cumvar / (4 γ_t)`.
    pub ratio: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumvarReport {
    pub seeds: usize,
    pub rows: Vec<CumvarRow>,
    pub max_ratio: f64,
    pub pass: bool,
}

impl CumvarReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "T,gamma,cumvar,ratio")?;
        for r in &self.rows {
            writeln!(w, "{},{:.16e},{:.16e},{:.16e}", r.t, r.gamma, r.cumvar, r.ratio)?;
        }
        Ok(())
    }
}

/// Compares seed-averaged cumulative variance with `4 γ_T` at every power
/// of two up to the shorter of the traces and the curve.
pub fn cumvar_vs_gamma(traces: &[RegretTrace], curve: &GammaCurve) -> Result<CumvarReport> {
    let first = traces
        .first()
        .ok_or_else(|| Error::Input("no traces to compare".into()))?;
    let len = first.len();
    for tr in traces {
        if tr.objective.kernel != curve.kernel || tr.lambda != curve.lambda {
            return Err(Error::Input(format!(
                "trace for seed {} does not share kernel and lambda with the curve",
                tr.seed
            )));
        }
        if tr.len() != len {
            return Err(Error::Input("traces differ in length".into()));
        }
    }
    let sums: Vec<Vec<f64>> = traces.iter().map(|t| t.cumulative_variance()).collect();
    let n = traces.len() as f64;
    let rows: Vec<CumvarRow> = powers_of_two(1, len.min(curve.t_max()))
        .into_iter()
        .map(|t| {
            let cumvar = sums.iter().map(|s| s[t - 1]).sum::<f64>() / n;
            let gamma = curve.gamma[t - 1];
            let ratio = cumvar / (4.0 * gamma);
            CumvarRow {
                t,
                gamma,
                cumvar,
                ratio,
                flagged: ratio > 1.0 + CUMVAR_SLACK,
            }
        })
        .collect();
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(CumvarReport {
        seeds: traces.len(),
        pass: rows.iter().all(|r| !r.flagged),
        rows,
        max_ratio,
    })
}

/// A finite-rank kernel `k(x, x') = φ(x)ᵀ Λ φ(x')` with random cosine
/// features `φ_j(x) = cos(ω_j·x + b_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureKernel {
    pub omega: Vec<Vec<f64>>,
    pub phase: Vec<f64>,
    pub lambda_diag: Vec<f64>,
}

impl FeatureKernel {
    /// Spectrum entries are log-uniform in `[1e-4, 1]`; draws below
    /// `1e-12` are regenerated.
    pub fn random<R: Rng + ?Sized>(features: usize, d: usize, rng: &mut R) -> Self {
        let freq = Normal::new(0.0, 5.0).expect("valid normal");
        let omega = (0..features).map(|_| (0..d).map(|_| rng.sample(freq)).collect()).collect();
        let phase = (0..features).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let lambda_diag = (0..features)
            .map(|_| loop {
                let v = 10f64.powf(rng.gen_range(-4.0..0.0));
                if v >= 1e-12 {
                    break v;
                }
            })
            .collect();
        Self {
            omega,
            phase,
            lambda_diag,
        }
    }

    pub fn features(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.omega.len(),
            self.omega
                .iter()
                .zip(&self.phase)
                .map(|(w, b)| (w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b).cos()),
        )
    }

    /// `Φ(A)`, one column per point.
    pub fn feature_matrix(&self, points: &[Point]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.omega.len(), points.len());
        for (j, p) in points.iter().enumerate() {
            m.set_column(j, &self.features(p));
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    /// `‖f‖²` under `α⁻¹ k_t`, from the posterior kernel's feature matrix.
    pub posterior_norm: f64,
    /// `α (‖f‖²_k + λ⁻¹ Σ f(x_s)²)`.
    pub prior_plus_data: f64,
    pub rel_error: f64,
    /// Condition number of the posterior feature covariance.
    pub condition: f64,
}

/// Checks the identity for `f = φᵀ c` under the tempered posterior kernel.
///
/// Left side: the posterior kernel is `φᵀ S φ'` with
/// `S = Λ − ΛΦ(ΦᵀΛΦ + λI)⁻¹ΦᵀΛ`, so `‖f‖²_{α⁻¹k_t} = α cᵀ S⁻¹ c`.
/// Right side: `α (cᵀ Λ⁻¹ c + λ⁻¹ Σ_s f(x_s)²)` with `f` evaluated pointwise.
pub fn norm_identity_instance(
    kernel: &FeatureKernel,
    points: &[Point],
    coeffs: &DVector<f64>,
    lambda: f64,
    alpha: f64,
) -> Result<IdentityCheck> {
    validate_lambda_alpha(lambda, alpha)?;
    let lam = DMatrix::from_diagonal(&DVector::from_column_slice(&kernel.lambda_diag));
    let s = if points.is_empty() {
        lam.clone()
    } else {
        let phi = kernel.feature_matrix(points);
        let lphi = &lam * &phi;
        let mut inner = phi.transpose() * &lphi;
        for i in 0..inner.nrows() {
            inner[(i, i)] += lambda;
        }
        let chol = inner
            .cholesky()
            .ok_or_else(|| Error::Numeric("ΦᵀΛΦ + λI not positive definite".into()))?;
        let s = &lam - &lphi * chol.solve(&lphi.transpose());
        (&s + s.transpose()) * 0.5
    };
    let eig = s.clone().symmetric_eigenvalues();
    let condition = eig.max() / eig.min();
    let chol = s
        .cholesky()
        .ok_or_else(|| Error::Numeric("posterior feature covariance not positive definite".into()))?;
    let posterior_norm = alpha * coeffs.dot(&chol.solve(coeffs));

    let prior: f64 = coeffs
        .iter()
        .zip(&kernel.lambda_diag)
        .map(|(c, l)| c * c / l)
        .sum();
    let data: f64 = points
        .iter()
        .map(|p| kernel.features(p).dot(coeffs).powi(2))
        .sum();
    let prior_plus_data = alpha * (prior + data / lambda);
    Ok(IdentityCheck {
        posterior_norm,
        prior_plus_data,
        rel_error: (posterior_norm - prior_plus_data).abs() / prior_plus_data.abs().max(f64::MIN_POSITIVE),
        condition,
    })
}

/// One random instance in `d = 2`: features, `t` uniform queries and
/// `c = Λ^{1/2} z`.
pub fn rkhs_norm_identity(
    feature_dim: usize,
    t: usize,
    lambda: f64,
    alpha: f64,
    seed: u64,
) -> Result<IdentityCheck> {
    if feature_dim == 0 {
        return Err(Error::Input("feature_dim must be >= 1".into()));
    }
    let mut rng = stream(seed, Purpose::Diagnostics, 1);
    let kernel = FeatureKernel::random(feature_dim, 2, &mut rng);
    let points: Vec<Point> = (0..t).map(|_| vec![rng.gen(), rng.gen()]).collect();
    let coeffs = DVector::from_iterator(
        feature_dim,
        kernel
            .lambda_diag
            .iter()
            .map(|l| l.sqrt() * rng.sample::<f64, _>(StandardNormal)),
    );
    norm_identity_instance(&kernel, &points, &coeffs, lambda, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySuite {
    pub instances: usize,
    pub max_rel_error: f64,
    pub worst_condition: f64,
}

/// `n` instances with `feature_dim ≤ 16`, `t ≤ 12`, `λ` log-uniform in
/// `[1e-2, 10]` and `α` in `(0.05, 1]`.
pub fn rkhs_identity_suite(n: usize, seed: u64) -> Result<IdentitySuite> {
    let mut rng = stream(seed, Purpose::Diagnostics, 2);
    let mut max_rel_error = 0.0_f64;
    let mut worst_condition = 0.0_f64;
    for i in 0..n {
        let fd = rng.gen_range(1..=16);
        let t = rng.gen_range(0..=12);
        let lambda = 10f64.powf(rng.gen_range(-2.0..1.0));
        let alpha = 1.0 - rng.gen_range(0.0..0.95);
        let c = rkhs_norm_identity(fd, t, lambda, alpha, seed.wrapping_add(i as u64))?;
        max_rel_error = max_rel_error.max(c.rel_error);
        worst_condition = worst_condition.max(c.condition);
    }
    Ok(IdentitySuite {
        instances: n,
        max_rel_error,
        worst_condition,
    })
}

/// Order-`β` Rényi divergence between `N(f(x_s), λ)` and `N(g(x_s), λ)`
/// summed over the queried points: `β/(2λ) Σ (f(x_s) − g(x_s))²`.
pub fn renyi_divergence<F, G>(f: &F, g: &G, points: &[Point], lambda: f64, beta: f64) -> Result<f64>
where
    F: Objective + ?Sized,
    G: Objective + ?Sized,
{
    if !(beta > 0.0) || beta == 1.0 || !beta.is_finite() {
        return Err(Error::Input(format!("beta must be > 0 and != 1, got {beta}")));
    }
    if !(lambda > 0.0) {
        return Err(Error::Input(format!("lambda must be > 0, got {lambda}")));
    }
    let ss: f64 = points.iter().map(|x| (f.value(x) - g.value(x)).powi(2)).sum();
    Ok(beta / (2.0 * lambda) * ss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ts_loop::{AlphaInfo, RoundRecord};
    use crate::objectives::RkhsFunction;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn information_gain_worked_values() {
        let one = DMatrix::from_element(1, 1, 1.0);
        assert!((information_gain(&one, 1.0).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        let ones = DMatrix::from_element(2, 2, 1.0);
        assert!((information_gain(&ones, 1.0).unwrap() - 0.549306).abs() < 1e-6);
        assert!((information_gain(&ones, 1.0).unwrap() - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert_eq!(information_gain(&DMatrix::zeros(3, 3), 0.5).unwrap(), 0.0);
        assert_eq!(information_gain(&DMatrix::zeros(0, 0), 0.5).unwrap(), 0.0);
        assert!(information_gain(&one, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn information_gain_permutation_invariant(seed in 0u64..1000, n in 2usize..12) {
            let mut rng = stream(seed, Purpose::Diagnostics, 9);
            let pts: Vec<Point> = (0..n).map(|_| vec![rng.gen::<f64>()]).collect();
            let spec = KernelSpec::Matern { nu: 1.5, a: 2.0 };
            let base = information_gain(&spec.gram(&pts), 0.3).unwrap();
            let mut perm = pts.clone();
            perm.reverse();
            perm.swap(0, n / 2);
            let other = information_gain(&spec.gram(&perm), 0.3).unwrap();
            prop_assert!((base - other).abs() <= 1e-12);
        }

        #[test]
        fn renyi_symmetric_and_additive(gap in -3.0f64..3.0, lambda in 0.1f64..5.0, beta in 0.1f64..0.9) {
            let f = |x: &[f64]| x[0];
            let g = move |x: &[f64]| x[0] + gap;
            let pts = vec![vec![0.3]];
            let fg = renyi_divergence(&f, &g, &pts, lambda, beta).unwrap();
            let gf = renyi_divergence(&g, &f, &pts, lambda, beta).unwrap();
            prop_assert_eq!(fg, gf);
            let twice = renyi_divergence(&f, &g, &[pts[0].clone(), pts[0].clone()], lambda, beta).unwrap();
            prop_assert!((twice - 2.0 * fg).abs() <= 1e-12 * twice.abs().max(1.0));
        }
    }

    #[test]
    fn renyi_worked_values() {
        let f = |x: &[f64]| x[0];
        let g = |x: &[f64]| x[0] + 1.0;
        assert_eq!(renyi_divergence(&f, &f, &[vec![0.1], vec![0.7]], 1.0, 0.5).unwrap(), 0.0);
        assert!((renyi_divergence(&f, &g, &[vec![0.5]], 1.0, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!(renyi_divergence(&f, &g, &[vec![0.5]], 1.0, 1.0).is_err());
        assert!(renyi_divergence(&f, &g, &[vec![0.5]], 0.0, 0.5).is_err());
    }

    #[test]
    fn chain_rule_matches_log_det_and_curve_is_monotone() {
        let spec = KernelSpec::RationalQuadratic { nu: 1.5, length_scale: 0.2 };
        let c = greedy_gamma_curve(&spec, 1, 0.5, 40, 256, 3).unwrap();
        assert!(c.gamma.windows(2).all(|w| w[1] >= w[0]));
        assert!(c.gamma[0] > 0.0);
        let pool = scrambled_sobol(256, 1, c.pool.seed).unwrap();
        for t in [1, 7, 40] {
            let pts: Vec<Point> = c.selected[..t].iter().map(|&i| pool[i].clone()).collect();
            let direct = information_gain(&spec.gram(&pts), 0.5).unwrap();
            assert!((direct - c.gamma[t - 1]).abs() < 1e-9, "t={t}");
        }
        assert!((c.gamma[0] - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert_eq!(c, greedy_gamma_curve(&spec, 1, 0.5, 40, 256, 3).unwrap());
        assert!(greedy_gamma_curve(&spec, 1, 0.5, 40, 39, 3).is_err());
    }

    #[test]
    fn nested_pool_does_not_lower_gamma() {
        let spec = KernelSpec::Matern { nu: 1.5, a: 4.0 };
        let small = greedy_gamma_curve(&spec, 1, 1.0, 64, 256, 5).unwrap();
        let big = greedy_gamma_curve(&spec, 1, 1.0, 64, 1024, 5).unwrap();
        for (s, b) in small.gamma.iter().zip(&big.gamma) {
            assert!(*b >= s - 1e-9, "{b} < {s}");
        }
    }

    fn fake_trace(kvars: &[f64], kernel: KernelSpec, lambda: f64) -> RegretTrace {
        let objective = RkhsFunction {
            kernel,
            centers: vec![vec![0.5]],
            coeffs: vec![1.0],
            norm: 1.0,
            x0: vec![0.5],
            value0: 1.0,
            x0_step: 0.0,
            seed: 0,
        };
        RegretTrace {
            seed: 0,
            lambda,
            alpha: AlphaInfo {
                alpha: 0.5,
                inverse_raw: None,
                clipped: false,
            },
            objective,
            rounds: kvars
                .iter()
                .enumerate()
                .map(|(i, k)| RoundRecord {
                    t: i + 1,
                    x: vec![0.5],
                    y: 0.0,
                    r_inst: 0.0,
                    r_cum: 0.0,
                    k_var: *k,
                    sigma2: 2.0 * k,
                    c_t: 0.0,
                    saturated: false,
                })
                .collect(),
            monitor_fired: vec![],
            worst_clipped: 0.0,
        }
    }

    #[test]
    fn cumvar_first_round_ratio() {
        let spec = KernelSpec::SquaredExponential { a: 1.0 };
        let curve = greedy_gamma_curve(&spec, 1, 1.0, 8, 64, 0).unwrap();
        let tr = fake_trace(&[1.0, 0.5, 0.2, 0.1], spec, 1.0);
        let rep = cumvar_vs_gamma(&[tr.clone(), tr], &curve).unwrap();
        assert_eq!(rep.rows.iter().map(|r| r.t).collect::<Vec<_>>(), vec![1, 2, 4]);
        let r1 = &rep.rows[0];
        assert!((4.0 * r1.gamma - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!((r1.ratio - 1.0 / (2.0 * 2f64.ln())).abs() < 1e-12);
        assert!((r1.ratio - 0.72).abs() < 0.005);
        assert!(rep.pass);
        let mut out = Vec::new();
        rep.write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("T,gamma,cumvar,ratio\n1,"));
    }

    #[test]
    fn cumvar_guards() {
        let spec = KernelSpec::SquaredExponential { a: 1.0 };
        let curve = greedy_gamma_curve(&spec, 1, 1.0, 8, 64, 0).unwrap();
        assert!(cumvar_vs_gamma(&[], &curve).is_err());
        let other = fake_trace(&[1.0], spec, 0.5);
        assert!(cumvar_vs_gamma(&[other], &curve).is_err());
        let big = fake_trace(&[3.0, 3.0, 3.0, 3.0], spec, 1.0);
        assert!(!cumvar_vs_gamma(&[big], &curve).unwrap().pass);
    }

    #[test]
    fn identity_trivial_cases() {
        let c = rkhs_norm_identity(5, 0, 0.7, 0.4, 1).unwrap();
        assert!(c.rel_error < 1e-14);
        // f vanishing on the queries: project c onto the null space of Φᵀ.
        let mut rng = stream(3, Purpose::Diagnostics, 0);
        let k = FeatureKernel::random(8, 2, &mut rng);
        let pts: Vec<Point> = (0..3).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let phi = k.feature_matrix(&pts);
        let z = DVector::from_fn(8, |i, _| (i as f64 * 0.7).sin());
        let proj = &phi * (phi.transpose() * &phi).try_inverse().unwrap() * phi.transpose();
        let c = &z - proj * &z;
        let check = norm_identity_instance(&k, &pts, &c, 0.5, 1.0).unwrap();
        let prior: f64 = c.iter().zip(&k.lambda_diag).map(|(c, l)| c * c / l).sum();
        assert!((check.prior_plus_data - prior).abs() < 1e-9 * prior);
        assert!(check.rel_error < 1e-8);
    }

    #[test]
    fn identity_suite_is_exact_to_rounding() {
        let s = rkhs_identity_suite(100, 17).unwrap();
        assert!(s.max_rel_error <= 1e-8, "{s:?}");
    }

    #[test]
    fn identity_scales_with_alpha() {
        let a = rkhs_norm_identity(6, 4, 0.3, 1.0, 9).unwrap();
        let b = rkhs_norm_identity(6, 4, 0.3, 0.25, 9).unwrap();
        assert!((b.posterior_norm - 0.25 * a.posterior_norm).abs() < 1e-10 * a.posterior_norm);
    }

    #[test]
    fn powers() {
        assert_eq!(powers_of_two(3, 40), vec![4, 8, 16, 32]);
        assert_eq!(powers_of_two(1, 1), vec![1]);
    }
}
