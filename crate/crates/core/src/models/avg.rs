use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Asymmetric Variance Gamma parameters.
///
/// `sigma` scales the Brownian part, `nu` is the variance rate of the gamma
/// clock and `theta` its drift (skew). The risk-neutral drift compensator
/// `ln(1 - theta*nu - sigma^2*nu/2) / nu` is taken on the principal complex
/// branch, so parameter sets that break the measure condition can still be
/// evaluated for diagnostics; see [`check_avg_measure`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvgParams {
    pub sigma: f64,
    pub nu: f64,
    pub theta: f64,
}

impl AvgParams {
    pub fn new(sigma: f64, nu: f64, theta: f64) -> Result<Self> {
        let p = AvgParams { sigma, nu, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "avg sigma must be > 0, got {}",
                self.sigma
            )));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "avg nu must be > 0, got {}",
                self.nu
            )));
        }
        if !self.theta.is_finite() {
            return Err(PricingError::InvalidParams("avg theta must be finite".into()));
        }
        Ok(())
    }

    /// `1 - theta*nu - sigma^2*nu/2`; positive exactly when the measure is valid.
    pub fn compensator_base(&self) -> f64 {
        1.0 - self.theta * self.nu - 0.5 * self.sigma * self.sigma * self.nu
    }
}

/// Risk-neutral validity of an AVG parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvgMeasureReport {
    /// `1/nu > theta + sigma^2/2`.
    pub measure_ok: bool,
    /// Upper bound on the Carr-Madan dampening parameter. Can be negative,
    /// in which case no alpha is admissible.
    pub alpha_max: f64,
}

pub fn check_avg_measure(params: &AvgParams) -> Result<AvgMeasureReport> {
    params.validate()?;
    let AvgParams { sigma, nu, theta } = *params;
    let s2 = sigma * sigma;
    let measure_ok = 1.0 / nu > theta + 0.5 * s2;
    let alpha_max = (theta * theta / (s2 * s2) + 2.0 / (s2 * nu)).sqrt() - theta / s2 - 1.0;
    Ok(AvgMeasureReport {
        measure_ok,
        alpha_max,
    })
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AvgKernel {
    drift: Complex64,
    power: f64,
    skew: f64,
    half_var: f64,
}

impl AvgKernel {
    pub(crate) fn new(p: &AvgParams, r: f64, t: f64) -> Self {
        let compensator = Complex64::new(p.compensator_base(), 0.0).ln() / p.nu;
        AvgKernel {
            drift: (r + compensator) * t,
            power: t / p.nu,
            skew: p.theta * p.nu,
            half_var: 0.5 * p.sigma * p.sigma * p.nu,
        }
    }

    #[inline]
    pub(crate) fn log_increment(&self, w: Complex64) -> Complex64 {
        let iw = Complex64::i() * w;
        let base = 1.0 - self.skew * iw + self.half_var * w * w;
        iw * self.drift - self.power * base.ln()
    }
}
