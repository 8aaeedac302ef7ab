//! Candidate sets and Thompson draws over them.
//!
//! The continuum arg max is realized on a finite candidate set: a grid, or
//! the first `m` points of an Owen-scrambled Sobol sequence.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp_posterior::PosteriorState;
use crate::kernel::Point;
use crate::linalg::cholesky_jittered;
use crate::sequence::{grid, grid_side, scrambled_sobol};

/// Default ceiling on the candidate count; the candidate covariance is
/// `m × m`.
pub const DEFAULT_MAX_CANDIDATES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Grid,
    LowDiscrepancy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub points: Vec<Point>,
    pub generator: Generator,
    pub seed: u32,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn generate_candidates(d: usize, m: usize, generator: Generator, seed: u32) -> Result<CandidateSet> {
    generate_candidates_within(d, m, generator, seed, DEFAULT_MAX_CANDIDATES)
}

pub fn generate_candidates_within(
    d: usize,
    m: usize,
    generator: Generator,
    seed: u32,
    max_candidates: usize,
) -> Result<CandidateSet> {
    if m == 0 {
        return Err(Error::Config("candidate count must be >= 1".into()));
    }
    if m > max_candidates {
        return Err(Error::Config(format!(
            "candidate count {m} exceeds budget {max_candidates}"
        )));
    }
    let points = match generator {
        Generator::Grid => grid(grid_side(m, d)?, d),
        Generator::LowDiscrepancy => scrambled_sobol(m, d, seed)?,
    };
    Ok(CandidateSet {
        points,
        generator,
        seed,
    })
}

pub fn standard_normals<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// `mean + α^{-1/2} L z` with `L Lᵀ = cov` (untempered, jittered on
/// breakdown). Tempering is applied after the factorization so that draws
/// for different α share the same `L z`.
pub fn draw_from_moments(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    alpha: f64,
    normals: &[f64],
) -> Result<DVector<f64>> {
    let m = mean.len();
    if m == 0 {
        return Err(Error::Logic("empty candidate set".into()));
    }
    if cov.nrows() != m || normals.len() != m {
        return Err(Error::Input("mean/cov/normals size mismatch".into()));
    }
    let (chol, _) = cholesky_jittered(cov)?;
    let z = DVector::from_column_slice(normals);
    let lz = chol.l() * z;
    let scale = alpha.powf(-0.5);
    Ok(DVector::from_iterator(
        m,
        mean.iter().zip(lz.iter()).map(|(mu, v)| mu + scale * v),
    ))
}

/// One joint draw of `θ ~ GP(μ_t, α⁻¹ k_t)` over the candidates.
pub fn sample_path<R: Rng + ?Sized>(
    state: &PosteriorState,
    candidates: &CandidateSet,
    rng: &mut R,
) -> Result<DVector<f64>> {
    if candidates.is_empty() {
        return Err(Error::Logic("empty candidate set".into()));
    }
    let p = state.predict(&candidates.points);
    let z = standard_normals(rng, candidates.len());
    draw_from_moments(&p.mean, &p.cov, state.alpha(), &z)
}

/// Index of the largest value; ties go to the lowest index.
pub fn select_argmax(values: &[f64]) -> Result<usize> {
    if values.is_empty() {
        return Err(Error::Logic("arg max over an empty candidate set".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite sampled value".into()));
    }
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::rng::{stream, Purpose};
    use proptest::prelude::*;

    const SE1: KernelSpec = KernelSpec::SquaredExponential { a: 1.0 };

    #[test]
    fn grid_candidates() {
        let c = generate_candidates(1, 3, Generator::Grid, 0).unwrap();
        assert_eq!(c.points, vec![vec![0.0], vec![0.5], vec![1.0]]);
        assert!(generate_candidates(1, 0, Generator::Grid, 0).is_err());
        assert!(matches!(
            generate_candidates_within(1, 100, Generator::LowDiscrepancy, 0, 50),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn candidates_are_deterministic_and_distinct() {
        let a = generate_candidates(2, 300, Generator::LowDiscrepancy, 17).unwrap();
        let b = generate_candidates(2, 300, Generator::LowDiscrepancy, 17).unwrap();
        assert_eq!(a, b);
        for i in 0..a.len() {
            for j in 0..i {
                assert_ne!(a.points[i], a.points[j]);
            }
        }
    }

    #[test]
    fn argmax_rules() {
        assert_eq!(select_argmax(&[0.1, 0.9, 0.4]).unwrap(), 1);
        assert_eq!(select_argmax(&[0.7, 0.7]).unwrap(), 0);
        assert!(matches!(select_argmax(&[]), Err(Error::Logic(_))));
        assert!(matches!(select_argmax(&[0.0, f64::NAN]), Err(Error::Input(_))));
    }

    proptest! {
        #[test]
        fn argmax_invariant_under_positive_affine_maps(
            v in prop::collection::vec(-10.0..10.0f64, 1..40),
            shift in -100.0..100.0f64,
            scale in 0.01..50.0f64,
        ) {
            let i = select_argmax(&v).unwrap();
            let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
            let scaled: Vec<f64> = v.iter().map(|x| scale * x).collect();
            // Shifting can merge near-ties through rounding; compare values.
            let j = select_argmax(&shifted).unwrap();
            prop_assert!((v[j] - v[i]).abs() <= 1e-12);
            prop_assert_eq!(select_argmax(&scaled).unwrap(), i);
        }
    }

    #[test]
    fn tempering_scales_the_centred_path() {
        let mut s = PosteriorState::new(SE1, 0.1, 1.0).unwrap();
        s.push_observation(&[0.25], 0.5).unwrap();
        s.push_observation(&[0.75], -0.3).unwrap();
        let c = generate_candidates(1, 64, Generator::LowDiscrepancy, 3).unwrap();
        let p = s.predict(&c.points);
        let z = standard_normals(&mut stream(1, Purpose::Sampling, 0), c.len());
        let base = draw_from_moments(&p.mean, &p.cov, 1.0, &z).unwrap();
        for alpha in [0.5, 0.1, 0.013] {
            let tempered = draw_from_moments(&p.mean, &p.cov, alpha, &z).unwrap();
            for i in 0..c.len() {
                let want = p.mean[i] + alpha.powf(-0.5) * (base[i] - p.mean[i]);
                assert!((tempered[i] - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn prior_draw_variance_matches_inflation() {
        let alpha = 0.25;
        let s = PosteriorState::new(SE1, 0.1, alpha).unwrap();
        let c = generate_candidates(1, 5, Generator::Grid, 0).unwrap();
        let mut rng = stream(11, Purpose::Sampling, 0);
        let n = 10_000;
        let mut sum = DVector::zeros(c.len());
        let mut sq = DVector::zeros(c.len());
        for _ in 0..n {
            let v = sample_path(&s, &c, &mut rng).unwrap();
            sum += &v;
            sq += v.component_mul(&v);
        }
        for i in 0..c.len() {
            let mean = sum[i] / n as f64;
            let var = sq[i] / n as f64 - mean * mean;
            assert!((var * alpha - 1.0).abs() < 0.05, "var {var}");
        }
    }

    #[test]
    fn marginals_match_predict() {
        let mut s = PosteriorState::new(KernelSpec::Matern { nu: 1.5, a: 3.0 }, 0.2, 0.5).unwrap();
        for (x, y) in [(0.1, 0.4), (0.5, -0.8), (0.55, -0.6), (0.9, 1.1)] {
            s.push_observation(&[x], y).unwrap();
        }
        let c = generate_candidates(1, 9, Generator::Grid, 0).unwrap();
        let p = s.predict(&c.points);
        let mut rng = stream(12, Purpose::Sampling, 0);
        let n = 10_000;
        let draws: Vec<DVector<f64>> = (0..n).map(|_| sample_path(&s, &c, &mut rng).unwrap()).collect();
        for i in 0..c.len() {
            let mean = draws.iter().map(|d| d[i]).sum::<f64>() / n as f64;
            let var = draws.iter().map(|d| (d[i] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (p.tempered_var[i] / n as f64).sqrt();
            assert!((mean - p.mean[i]).abs() <= 3.0 * se, "mean {mean} vs {}", p.mean[i]);
            assert!((var / p.tempered_var[i] - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn single_candidate_is_scalar_normal() {
        let mut s = PosteriorState::new(SE1, 0.5, 0.5).unwrap();
        s.push_observation(&[0.3], 1.0).unwrap();
        let c = CandidateSet {
            points: vec![vec![0.6]],
            generator: Generator::Grid,
            seed: 0,
        };
        let (mu, var) = s.predict_point(&[0.6]);
        let z = standard_normals(&mut stream(2, Purpose::Sampling, 5), 1);
        let p = s.predict(&c.points);
        let v = draw_from_moments(&p.mean, &p.cov, 0.5, &z).unwrap();
        assert!((v[0] - (mu + (var / 0.5).sqrt() * z[0])).abs() < 1e-12);
    }

    #[test]
    fn seeded_paths_are_bitwise_reproducible() {
        let s = PosteriorState::new(SE1, 0.1, 0.3).unwrap().incorporate(&[0.4], 0.2).unwrap();
        let c = generate_candidates(1, 128, Generator::LowDiscrepancy, 9).unwrap();
        let a = sample_path(&s, &c, &mut stream(5, Purpose::Sampling, 2)).unwrap();
        let b = sample_path(&s, &c, &mut stream(5, Purpose::Sampling, 2)).unwrap();
        assert_eq!(a, b);
    }

    /// Brute-force star discrepancy in 2-D over boxes anchored at the origin
    /// with corners on point coordinates (open and closed counts).
    fn star_discrepancy_2d(pts: &[Point]) -> f64 {
        let m = pts.len() as f64;
        let mut xs: Vec<f64> = pts.iter().map(|p| p[0]).chain([1.0]).collect();
        let mut ys: Vec<f64> = pts.iter().map(|p| p[1]).chain([1.0]).collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let mut worst = 0.0_f64;
        for &u in &xs {
            for &v in &ys {
                let open = pts.iter().filter(|p| p[0] < u && p[1] < v).count() as f64;
                let closed = pts.iter().filter(|p| p[0] <= u && p[1] <= v).count() as f64;
                let vol = u * v;
                worst = worst.max(vol - open / m).max(closed / m - vol);
            }
        }
        worst
    }

    #[test]
    fn low_discrepancy_beats_iid_uniform() {
        use rand::Rng;
        let mut ld = 0.0;
        let mut iid = 0.0;
        for seed in 0..20u32 {
            let c = generate_candidates(2, 64, Generator::LowDiscrepancy, seed).unwrap();
            ld += star_discrepancy_2d(&c.points);
            let mut rng = stream(seed as u64, Purpose::Diagnostics, 0);
            let u: Vec<Point> = (0..64).map(|_| vec![rng.gen(), rng.gen()]).collect();
            iid += star_discrepancy_2d(&u);
        }
        assert!(ld < iid, "scrambled {} vs iid {}", ld / 20.0, iid / 20.0);
    }
}
