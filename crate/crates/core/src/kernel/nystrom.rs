use log::warn;
use serde::{Deserialize, Serialize};

use super::{gram_matrix, Kernel};
use crate::error::{Error, Result};
use crate::fit::{fit_log_slope, LineFit};
use crate::sequence::scrambled_sobol;

/// Eigenvalues below this fraction of the leading one are treated as
/// round-off and left out of decay fits.
pub const NUMERICAL_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NystromSpectrum {
    /// Nonincreasing.
    pub eigenvalues: Vec<f64>,
    pub m: usize,
    pub warnings: Vec<String>,
}

impl NystromSpectrum {
    /// Index window `[m^0.2, m^0.6]` (1-based) used for decay fits.
    pub fn decay_window(&self) -> (usize, usize) {
        let m = self.m as f64;
        (m.powf(0.2).ceil() as usize, m.powf(0.6).floor() as usize)
    }

    /// Log-log slope of `λ_j` against `j` over `[lo, hi]` (1-based,
    /// inclusive), skipping eigenvalues below the numerical floor.
    pub fn slope_over(&self, lo: usize, hi: usize) -> Result<LineFit> {
        let floor = NUMERICAL_FLOOR * self.eigenvalues.first().copied().unwrap_or(0.0);
        let (js, ls): (Vec<f64>, Vec<f64>) = (lo.max(1)..=hi.min(self.eigenvalues.len()))
            .filter(|&j| self.eigenvalues[j - 1] > floor)
            .map(|j| (j as f64, self.eigenvalues[j - 1]))
            .unzip();
        fit_log_slope(&js, &ls)
    }

    /// Slope over the default window.
    pub fn decay_slope(&self) -> Result<LineFit> {
        let (lo, hi) = self.decay_window();
        self.slope_over(lo, hi)
    }
}

/// Eigenvalues of `K(X, X) / m` over the first `m` points of a scrambled
/// Sobol sequence, sorted nonincreasing.
pub fn nystrom_spectrum<K: Kernel + ?Sized>(
    kernel: &K,
    d: usize,
    m: usize,
    seed: u32,
) -> Result<NystromSpectrum> {
    if m < 2 {
        return Err(Error::Input(format!("nystrom needs m >= 2, got {m}")));
    }
    let points = scrambled_sobol(m, d, seed)?;
    let mut g = gram_matrix(kernel, &points);
    g /= m as f64;
    let mut eigenvalues: Vec<f64> = g.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));

    let mut warnings = Vec::new();
    if let Some(&min) = eigenvalues.last() {
        if min < -1e-8 {
            return Err(Error::Numeric(format!("gram matrix has eigenvalue {min:e} < -1e-8")));
        }
    }
    let spec = NystromSpectrum {
        eigenvalues,
        m,
        warnings: Vec::new(),
    };
    let (lo, hi) = spec.decay_window();
    if hi < lo + 2 {
        warnings.push(format!("m={m} too small to resolve decay window [{lo}, {hi}]"));
    } else {
        let floor = NUMERICAL_FLOOR * spec.eigenvalues[0];
        let below = (lo..=hi).filter(|&j| spec.eigenvalues[j - 1] <= floor).count();
        if below > 0 {
            warnings.push(format!(
                "{below} eigenvalues in window [{lo}, {hi}] are at round-off level and excluded from decay fits"
            ));
        }
    }
    for w in &warnings {
        warn!("{w}");
    }
    Ok(NystromSpectrum { warnings, ..spec })
}
