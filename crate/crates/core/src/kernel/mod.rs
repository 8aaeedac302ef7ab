//! Stationary covariance kernels on `[0,1]^d`, Gram matrices, and a Nyström
//! estimate of the kernel operator spectrum.
//!
//! All kernels have unit variance, `k(x, x) = 1`:
//!
//! | kernel | `k(r)` |
//! |--------|--------|
//! | squared exponential | `exp(-a² r²)` |
//! | Matérn-ν | `2^{1-ν}/Γ(ν) (√(2ν) a r)^ν K_ν(√(2ν) a r)` |
//! | rational quadratic | `(1 + r²/(2ν ℓ²))^{-ν}` |

pub mod bessel;
mod nystrom;

pub use nystrom::{nystrom_spectrum, NystromSpectrum};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// A point in `[0,1]^d`.
pub type Point = Vec<f64>;

/// Below this distance every kernel returns exactly 1 (removes the `0·∞` of
/// the Matérn expression at the origin).
pub const ORIGIN_CUTOFF: f64 = 1e-12;

/// Anything that can be evaluated as a covariance function.
pub trait Kernel {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum KernelSpec {
    /// `a` is an inverse length-scale.
    #[serde(rename = "se")]
    SquaredExponential { a: f64 },
    #[serde(rename = "matern")]
    Matern { nu: f64, a: f64 },
    #[serde(rename = "rq")]
    RationalQuadratic { nu: f64, length_scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    SquaredExponential,
    Matern,
    RationalQuadratic,
}

impl KernelSpec {
    pub fn family(&self) -> KernelFamily {
        match self {
            KernelSpec::SquaredExponential { .. } => KernelFamily::SquaredExponential,
            KernelSpec::Matern { .. } => KernelFamily::Matern,
            KernelSpec::RationalQuadratic { .. } => KernelFamily::RationalQuadratic,
        }
    }

    /// Smoothness ν for Matérn and RQ.
    pub fn nu(&self) -> Option<f64> {
        match *self {
            KernelSpec::SquaredExponential { .. } => None,
            KernelSpec::Matern { nu, .. } | KernelSpec::RationalQuadratic { nu, .. } => Some(nu),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            KernelSpec::SquaredExponential { a } => format!("se(a={a})"),
            KernelSpec::Matern { nu, a } => format!("matern(nu={nu},a={a})"),
            KernelSpec::RationalQuadratic { nu, length_scale } => {
                format!("rq(nu={nu},l={length_scale})")
            }
        }
    }

    /// Checks hyperparameters for use on a domain of dimension `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Hyperparameter(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        match *self {
            KernelSpec::SquaredExponential { a } => positive("a", a)?,
            KernelSpec::Matern { nu, a } => {
                positive("nu", nu)?;
                positive("a", a)?;
                if nu <= d as f64 / 2.0 {
                    return Err(Error::Hyperparameter(format!(
                        "matern requires nu > d/2 (nu={nu}, d={d})"
                    )));
                }
                // Probe the general Bessel route across the working range.
                if matern_closed_form(nu, 1.0).is_none() {
                    let near_origin = matern_general(nu, a * 1e-9);
                    let bad_limit = !((near_origin - 1.0).abs() < 1e-6);
                    for r in [1e-3, 0.5, 3f64.sqrt() * d as f64] {
                        let v = matern_general(nu, a * r);
                        if bad_limit || !v.is_finite() || !(0.0..=1.0 + 1e-8).contains(&v) {
                            return Err(Error::Hyperparameter(format!(
                                "matern bessel evaluation not representable for nu={nu}"
                            )));
                        }
                    }
                }
            }
            KernelSpec::RationalQuadratic { nu, length_scale } => {
                positive("nu", nu)?;
                positive("length_scale", length_scale)?;
            }
        }
        Ok(())
    }

    /// Kernel value as a function of the Euclidean distance `r ≥ 0`.
    pub fn of_distance(&self, r: f64) -> f64 {
        if r < ORIGIN_CUTOFF {
            return 1.0;
        }
        match *self {
            KernelSpec::SquaredExponential { a } => (-(a * r).powi(2)).exp(),
            KernelSpec::Matern { nu, a } => {
                matern_closed_form(nu, a * r).unwrap_or_else(|| matern_general(nu, a * r))
            }
            KernelSpec::RationalQuadratic { nu, length_scale } => {
                (1.0 + r * r / (2.0 * nu * length_scale * length_scale)).powf(-nu)
            }
        }
    }

    pub fn gram(&self, points: &[Point]) -> DMatrix<f64> {
        gram_matrix(self, points)
    }

    /// `k(A, B)` with rows indexed by `a`.
    pub fn cross(&self, a: &[Point], b: &[Point]) -> DMatrix<f64> {
        DMatrix::from_fn(a.len(), b.len(), |i, j| self.eval(&a[i], &b[j]))
    }
}

impl Kernel for KernelSpec {
    #[inline]
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.of_distance(distance(x, y))
    }
}

#[inline]
pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Half-integer orders in closed form; `s = a·r`.
fn matern_closed_form(nu: f64, s: f64) -> Option<f64> {
    if nu == 0.5 {
        Some((-s).exp())
    } else if nu == 1.5 {
        let z = 3f64.sqrt() * s;
        Some((1.0 + z) * (-z).exp())
    } else if nu == 2.5 {
        let z = 5f64.sqrt() * s;
        Some((1.0 + z + z * z / 3.0) * (-z).exp())
    } else {
        None
    }
}

/// General order through `ln K_ν`; NaN when the Bessel routine fails.
fn matern_general(nu: f64, s: f64) -> f64 {
    let z = (2.0 * nu).sqrt() * s;
    match bessel::ln_bessel_k(nu, z) {
        Some(lk) => ((1.0 - nu) * std::f64::consts::LN_2 - ln_gamma(nu) + nu * z.ln() + lk).exp(),
        None => f64::NAN,
    }
}

/// Checked kernel evaluation.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Input(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite coordinate".into()));
    }
    let v = spec.eval(x, y);
    if !v.is_finite() {
        return Err(Error::Hyperparameter(format!(
            "kernel {} evaluated to {v}",
            spec.name()
        )));
    }
    Ok(v)
}

/// Symmetric Gram matrix `k(X, X)`.
pub fn gram_matrix<K: Kernel + ?Sized>(kernel: &K, points: &[Point]) -> DMatrix<f64> {
    let n = points.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = kernel.eval(&points[i], &points[i]);
        for j in 0..i {
            let v = kernel.eval(&points[i], &points[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}
