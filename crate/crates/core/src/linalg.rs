//! Small dense linear-algebra helpers: a packed lower Cholesky factor that
//! grows one row at a time, and a jittered factorization for matrices that
//! are only PSD up to rounding.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// First jitter level, relative to the largest diagonal entry.
pub const JITTER_START: f64 = 1e-10;
/// Last jitter level tried before giving up.
pub const JITTER_MAX: f64 = 1e-6;

/// Relative jitter levels tried after a plain factorization fails:
/// 1e-10, 1e-9, ..., 1e-6.
pub fn jitter_ladder() -> impl Iterator<Item = f64> {
    (0..)
        .map(|k| JITTER_START * 10f64.powi(k))
        .take_while(|j| *j <= JITTER_MAX * (1.0 + 1e-9))
}

/// Cholesky of a symmetric matrix with the jitter escalation policy.
/// Returns the factor and the absolute jitter that was added to the diagonal.
pub fn cholesky_jittered(m: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok((c, 0.0));
    }
    let scale = max_diag(m);
    for rel in jitter_ladder() {
        let jitter = rel * scale;
        let mut shifted = m.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(shifted) {
            return Ok((c, jitter));
        }
    }
    Err(Error::Numeric(format!(
        "cholesky failed on {}x{} matrix after jitter up to {:e} x max diagonal",
        m.nrows(),
        m.ncols(),
        JITTER_MAX
    )))
}

pub fn max_diag(m: &DMatrix<f64>) -> f64 {
    let d = (0..m.nrows()).map(|i| m[(i, i)]).fold(0.0_f64, f64::max);
    if d > 0.0 {
        d
    } else {
        1.0
    }
}

/// Lower-triangular factor stored row-major in packed form. Row `i` holds
/// `i + 1` entries, so appending a row never moves the existing ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PackedCholesky {
    n: usize,
    data: Vec<f64>,
}

impl PackedCholesky {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            n: 0,
            data: Vec::with_capacity(n * (n + 1) / 2),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn offset(i: usize) -> usize {
        i * (i + 1) / 2
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let o = Self::offset(i);
        &self.data[o..o + i + 1]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.data[Self::offset(i) + j]
        }
    }

    /// Border update: append the row for a new point whose covariances with
    /// the existing points are `cross` and whose own (regularised) variance is
    /// `diag`. On a non-positive pivot the factor is left untouched and the
    /// pivot is returned as the error.
    pub fn push(&mut self, cross: &[f64], diag: f64) -> Result<(), f64> {
        debug_assert_eq!(cross.len(), self.n);
        let mut l = cross.to_vec();
        self.forward_solve(&mut l);
        let pivot = diag - l.iter().map(|v| v * v).sum::<f64>();
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(pivot);
        }
        self.data.extend_from_slice(&l);
        self.data.push(pivot.sqrt());
        self.n += 1;
        Ok(())
    }

    /// Appends a row whose off-diagonal part `l = L⁻¹ k` and diagonal are
    /// already known.
    pub fn push_row(&mut self, l: &[f64], diag: f64) {
        debug_assert_eq!(l.len(), self.n);
        debug_assert!(diag > 0.0);
        self.data.extend_from_slice(l);
        self.data.push(diag);
        self.n += 1;
    }

    /// Solves `L x = b` in place.
    pub fn forward_solve(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let s: f64 = row[..i].iter().zip(&b[..i]).map(|(l, x)| l * x).sum();
            b[i] = (b[i] - s) / row[i];
        }
    }

    /// Solves `Lᵀ x = b` in place.
    pub fn backward_solve_transpose(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        for i in (0..self.n).rev() {
            let row = self.row(i);
            b[i] /= row[i];
            let xi = b[i];
            for (bj, lij) in b[..i].iter_mut().zip(&row[..i]) {
                *bj -= lij * xi;
            }
        }
    }

    /// Solves `L Lᵀ x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        self.forward_solve(b);
        self.backward_solve_transpose(b);
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.row(i)[i].ln()).sum::<f64>()
    }

    /// Dense copy of `L`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Factor a symmetric matrix row by row; fails on the first
    /// non-positive pivot.
    pub fn factor(m: &DMatrix<f64>) -> Result<Self, f64> {
        let n = m.nrows();
        let mut c = Self::with_capacity(n);
        let mut cross = Vec::with_capacity(n);
        for i in 0..n {
            cross.clear();
            cross.extend((0..i).map(|j| m[(i, j)]));
            c.push(&cross, m[(i, i)])?;
        }
        Ok(c)
    }

    /// Ratio of the largest to smallest squared pivot; a cheap lower bound on
    /// the 2-norm condition number of `L Lᵀ`.
    pub fn condition_estimate(&self) -> f64 {
        if self.n == 0 {
            return 1.0;
        }
        let (lo, hi) = (0..self.n)
            .map(|i| self.row(i)[i].powi(2))
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), p| (lo.min(p), hi.max(p)));
        hi / lo
    }
}
