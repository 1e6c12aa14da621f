//! Model parameters, characteristic functions and cumulants.

mod avg;
mod bates;
mod bsm;
mod cumulants;
mod file;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

pub use avg::{check_avg_measure, AvgMeasureReport, AvgParams};
pub use bates::BatesParams;
pub use bsm::BsmParams;
pub use cumulants::{cumulants, Cumulants};
pub use file::ModelFile;

pub(crate) use cumulants::log_moment_slope;

/// Spot and continuously compounded risk-free rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    pub s0: f64,
    pub r: f64,
}

impl MarketParams {
    pub fn new(s0: f64, r: f64) -> Result<Self> {
        let m = MarketParams { s0, r };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s0.is_finite() && self.s0 > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "spot must be > 0, got {}",
                self.s0
            )));
        }
        if !self.r.is_finite() {
            return Err(PricingError::InvalidParams("rate must be finite".into()));
        }
        Ok(())
    }

    pub fn discount(&self, t: f64) -> f64 {
        (-self.r * t).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Bsm,
    Bates,
    Avg,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Bsm => "bsm",
            ModelKind::Bates => "bates",
            ModelKind::Avg => "avg",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Bsm(BsmParams),
    Bates(BatesParams),
    Avg(AvgParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Bsm(_) => ModelKind::Bsm,
            ModelParams::Bates(_) => ModelKind::Bates,
            ModelParams::Avg(_) => ModelKind::Avg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Bsm(p) => p.validate(),
            ModelParams::Bates(p) => p.validate(),
            ModelParams::Avg(p) => p.validate(),
        }
    }

    /// Largest admissible Carr-Madan dampening, if the model restricts it.
    pub fn alpha_max(&self) -> Option<f64> {
        match self {
            ModelParams::Avg(p) => check_avg_measure(p).ok().map(|r| r.alpha_max),
            _ => None,
        }
    }
}

impl From<BsmParams> for ModelParams {
    fn from(p: BsmParams) -> Self {
        ModelParams::Bsm(p)
    }
}

impl From<BatesParams> for ModelParams {
    fn from(p: BatesParams) -> Self {
        ModelParams::Bates(p)
    }
}

impl From<AvgParams> for ModelParams {
    fn from(p: AvgParams) -> Self {
        ModelParams::Avg(p)
    }
}

pub(crate) fn validate_maturity(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(PricingError::InvalidParams(format!(
            "maturity must be > 0, got {t}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    Bsm(bsm::BsmKernel),
    Bates(bates::BatesKernel),
    Avg(avg::AvgKernel),
}

/// Characteristic function of `ln S_T`, prepared for one model, market and
/// maturity. Construction validates everything; evaluation is then a pure
/// function of the complex frequency.
#[derive(Debug, Clone, Copy)]
pub struct CharacteristicFunction {
    kernel: Kernel,
    log_spot: f64,
    t: f64,
}

impl CharacteristicFunction {
    pub fn new(model: &ModelParams, market: &MarketParams, t: f64) -> Result<Self> {
        model.validate()?;
        market.validate()?;
        validate_maturity(t)?;
        let kernel = match model {
            ModelParams::Bsm(p) => Kernel::Bsm(bsm::BsmKernel::new(p, market.r, t)),
            ModelParams::Bates(p) => Kernel::Bates(bates::BatesKernel::new(p, market.r, t)),
            ModelParams::Avg(p) => Kernel::Avg(avg::AvgKernel::new(p, market.r, t)),
        };
        Ok(CharacteristicFunction {
            kernel,
            log_spot: market.s0.ln(),
            t,
        })
    }

    pub fn maturity(&self) -> f64 {
        self.t
    }

    pub fn log_spot(&self) -> f64 {
        self.log_spot
    }

    /// `ln E[exp(i w ln(S_T/S_0))]`, the exponent without the spot term.
    #[inline]
    pub fn log_increment(&self, w: Complex64) -> Complex64 {
        match &self.kernel {
            Kernel::Bsm(k) => k.log_increment(w),
            Kernel::Bates(k) => k.log_increment(w),
            Kernel::Avg(k) => k.log_increment(w),
        }
    }

    /// `ln psi(w)`.
    #[inline]
    pub fn log_eval(&self, w: Complex64) -> Complex64 {
        Complex64::i() * w * self.log_spot + self.log_increment(w)
    }

    /// `psi(w) = E[exp(i w ln S_T)]`.
    #[inline]
    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.log_eval(w).exp()
    }

    /// Closed-form (mean, variance) of `ln(S_T/S_0)` where the model has one.
    pub(crate) fn gaussian_moments(&self) -> Option<(f64, f64)> {
        match &self.kernel {
            Kernel::Bsm(k) => Some((k.mean(), k.variance())),
            _ => None,
        }
    }

    pub(crate) fn ignores_fourth_cumulant(&self) -> bool {
        matches!(self.kernel, Kernel::Bates(_))
    }
}

/// Evaluates `psi_{ln S_T}(w)` for a single frequency.
pub fn evaluate_cf(
    model: &ModelParams,
    market: &MarketParams,
    t: f64,
    w: Complex64,
) -> Result<Complex64> {
    let cf = CharacteristicFunction::new(model, market, t)?;
    let v = cf.eval(w);
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(PricingError::NonFiniteResult(format!(
            "characteristic function at w = {w}"
        )));
    }
    Ok(v)
}
