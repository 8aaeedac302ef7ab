//! Posterior contraction rates `ε_t`, the horizon-driven choice of `α` and
//! the saturation threshold `C_t`.
//!
//! ```text
//! SE      ε_t = c · t^{-1/2} · L^{(d+1)/2}
//! Matérn  ε_t = c · t^{-ν/(2ν+d)} · L^{p},   p = q/(2+d) unless overridden
//! RQ      ε_t = c · t^{-ν/(2ν+d)}
//! ```
//!
//! with `L = ln(max(t, e))`, so the log factor is 1 rather than 0 or
//! negative for `t < e`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec};

/// Margin keeping the scheduled `α` strictly below 1.
pub const ALPHA_CLIP_DELTA: f64 = 1e-6;

fn one() -> f64 {
    1.0
}

/// Constants the asymptotic rates leave free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConstants {
    #[serde(default = "one")]
    pub c_eps: f64,
    /// Log power numerator for Matérn.
    #[serde(default)]
    pub q: f64,
    /// Replaces the Matérn log power `q/(2+d)` outright when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_exponent: Option<f64>,
}

impl Default for RateConstants {
    fn default() -> Self {
        Self {
            c_eps: 1.0,
            q: 0.0,
            log_exponent: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    family: KernelFamily,
    nu: f64,
    d: usize,
    c_eps: f64,
    log_power: f64,
}

impl RateModel {
    pub fn new(spec: &KernelSpec, d: usize, consts: &RateConstants) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("dimension must be >= 1".into()));
        }
        if !(consts.c_eps > 0.0) || !consts.c_eps.is_finite() {
            return Err(Error::Config(format!("c_eps must be > 0, got {}", consts.c_eps)));
        }
        if !(consts.q >= 0.0) || !consts.q.is_finite() {
            return Err(Error::Config(format!("q must be >= 0, got {}", consts.q)));
        }
        let family = spec.family();
        let log_power = match family {
            KernelFamily::SquaredExponential => (d as f64 + 1.0) / 2.0,
            KernelFamily::Matern => consts.log_exponent.unwrap_or(consts.q / (2.0 + d as f64)),
            KernelFamily::RationalQuadratic => 0.0,
        };
        if !(log_power >= 0.0) || !log_power.is_finite() {
            return Err(Error::Config(format!("log exponent must be >= 0, got {log_power}")));
        }
        Ok(Self {
            family,
            nu: spec.nu().unwrap_or(f64::INFINITY),
            d,
            c_eps: consts.c_eps,
            log_power,
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// Exponent `e` in `ε_t ∝ t^{-e}` (ignoring logs).
    pub fn poly_exponent(&self) -> f64 {
        match self.family {
            KernelFamily::SquaredExponential => 0.5,
            _ => self.nu / (2.0 * self.nu + self.d as f64),
        }
    }

    pub fn log_power(&self) -> f64 {
        self.log_power
    }

    pub fn epsilon(&self, t: f64) -> f64 {
        let l = t.max(std::f64::consts::E).ln();
        self.c_eps * t.powf(-self.poly_exponent()) * l.powf(self.log_power)
    }

    /// `t · ε_t²`, with the value 0 at `t = 0`.
    pub fn t_eps2(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        t * self.epsilon(t).powi(2)
    }

    /// `C_t = sqrt(D α t ε_t² / (1 − α))`.
    pub fn threshold(&self, t: f64, alpha: f64, big_d: f64) -> f64 {
        (big_d * alpha * self.t_eps2(t) / (1.0 - alpha)).sqrt()
    }

    /// Exponent of `T` in the regret bound, logs ignored.
    pub fn regret_exponent(&self) -> f64 {
        match self.family {
            KernelFamily::SquaredExponential => 0.5,
            _ => {
                let d = self.d as f64;
                (2.0 * self.nu + 3.0 * d) / (2.0 * (2.0 * self.nu + d))
            }
        }
    }

    /// Exponent of `T` in the information gain, `None` for SE where it is
    /// polylogarithmic.
    pub fn gamma_exponent(&self) -> Option<f64> {
        match self.family {
            KernelFamily::SquaredExponential => None,
            _ => Some(self.d as f64 / (2.0 * self.nu + self.d as f64)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSchedule {
    pub horizon: usize,
    /// `T ε_T²` before clipping.
    pub inverse_raw: f64,
    pub alpha: f64,
    pub clipped: bool,
}

/// `α = 1 / max(T ε_T², 1 + δ)`.
pub fn alpha_from_horizon(rate: &RateModel, horizon: usize) -> Result<AlphaSchedule> {
    if horizon < 2 {
        return Err(Error::Config(format!("alpha schedule needs T >= 2, got {horizon}")));
    }
    let inverse_raw = rate.t_eps2(horizon as f64);
    let floor = 1.0 + ALPHA_CLIP_DELTA;
    let clipped = !(inverse_raw > floor);
    Ok(AlphaSchedule {
        horizon,
        inverse_raw,
        alpha: 1.0 / inverse_raw.max(floor),
        clipped,
    })
}
