//! Gaussian process Thompson sampling with fractional-posterior variance
//! inflation, and the diagnostics used to check its regret and
//! information-gain behaviour empirically.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod gp_posterior;
pub mod kernel;
pub mod linalg;
pub mod objectives;
pub mod rate;
pub mod rng;
pub mod sampler;
pub mod sequence;
pub mod ts_loop;

pub use error::{Error, Result};
