//! Deterministic point sets on `[0,1]^d`: regular grids and Owen-scrambled
//! Sobol sequences (via `sobol_burley`).

use crate::error::{Error, Result};
use crate::kernel::Point;

/// Largest sequence length supported by the Sobol backend.
pub const MAX_SOBOL_POINTS: usize = 1 << 16;
pub const MAX_SOBOL_DIM: usize = sobol_burley::NUM_DIMENSIONS as usize;

/// First `m` points of the scrambled Sobol sequence with the given seed.
/// Prefixes are nested: `scrambled_sobol(n, d, s)` is a prefix of
/// `scrambled_sobol(m, d, s)` for `n ≤ m`.
pub fn scrambled_sobol(m: usize, d: usize, seed: u32) -> Result<Vec<Point>> {
    if m > MAX_SOBOL_POINTS {
        return Err(Error::Config(format!(
            "scrambled sequence supports at most {MAX_SOBOL_POINTS} points, asked for {m}"
        )));
    }
    if d == 0 || d > MAX_SOBOL_DIM {
        return Err(Error::Config(format!("dimension {d} outside 1..={MAX_SOBOL_DIM}")));
    }
    Ok((0..m as u32)
        .map(|i| {
            (0..d as u32)
                .map(|k| sobol_burley::sample(i, k, seed) as f64)
                .collect()
        })
        .collect())
}

/// Number of grid levels per axis for an `m`-point grid in `d` dimensions;
/// `m` must be a perfect `d`-th power.
pub fn grid_side(m: usize, d: usize) -> Result<usize> {
    let side = (m as f64).powf(1.0 / d as f64).round() as usize;
    if side.checked_pow(d as u32) != Some(m) {
        return Err(Error::Config(format!(
            "grid needs m to be a perfect {d}-th power, got m={m}"
        )));
    }
    Ok(side)
}

/// Regular grid with `side` levels per axis including both endpoints
/// (a single level sits at 0.5). Row-major with the last axis fastest.
pub fn grid(side: usize, d: usize) -> Vec<Point> {
    let level = |i: usize| {
        if side == 1 {
            0.5
        } else {
            i as f64 / (side - 1) as f64
        }
    };
    let total = side.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            let mut p = vec![0.0; d];
            for k in (0..d).rev() {
                p[k] = level(idx % side);
                idx /= side;
            }
            p
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        assert_eq!(grid(3, 1), vec![vec![0.0], vec![0.5], vec![1.0]]);
        assert_eq!(grid(2, 2).len(), 4);
        assert_eq!(grid_side(64, 2).unwrap(), 8);
        assert!(grid_side(10, 2).is_err());
    }

    #[test]
    fn sobol_nested_and_seeded() {
        let a = scrambled_sobol(64, 2, 5).unwrap();
        let b = scrambled_sobol(256, 2, 5).unwrap();
        assert_eq!(&b[..64], &a[..]);
        assert_ne!(scrambled_sobol(64, 2, 6).unwrap(), a);
        assert!(a.iter().flatten().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn sobol_is_stratified_in_one_dimension() {
        let pts = scrambled_sobol(256, 1, 11).unwrap();
        let mut cells = vec![0usize; 256];
        for p in &pts {
            cells[(p[0] * 256.0) as usize] += 1;
        }
        assert!(cells.iter().all(|&c| c == 1));
    }

    #[test]
    fn sobol_limits() {
        assert!(scrambled_sobol(MAX_SOBOL_POINTS + 1, 1, 0).is_err());
        assert!(scrambled_sobol(4, 0, 0).is_err());
    }
}
