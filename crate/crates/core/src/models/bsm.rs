use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Geometric Brownian motion volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsmParams {
    pub sigma: f64,
}

impl BsmParams {
    pub fn new(sigma: f64) -> Result<Self> {
        let p = BsmParams { sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "bsm sigma must be > 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BsmKernel {
    drift: f64,
    variance: f64,
}

impl BsmKernel {
    pub(crate) fn new(p: &BsmParams, r: f64, t: f64) -> Self {
        BsmKernel {
            drift: (r - 0.5 * p.sigma * p.sigma) * t,
            variance: p.sigma * p.sigma * t,
        }
    }

    /// ln E[exp(i w ln(S_T / S_0))]
    #[inline]
    pub(crate) fn log_increment(&self, w: Complex64) -> Complex64 {
        Complex64::i() * w * self.drift - 0.5 * w * w * self.variance
    }

    pub(crate) fn mean(&self) -> f64 {
        self.drift
    }

    pub(crate) fn variance(&self) -> f64 {
        self.variance
    }
}
