use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_values, finite, CountingCf, GridUsed, Method, PriceVector, PricingRequest};
use crate::error::{PricingError, Result};
use crate::models::{MarketParams, ModelParams};
use crate::transforms::{phase_sums, FourierGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarrMadanConfig {
    pub alpha: f64,
    /// Skip the AVG `alpha < alpha_max` gate. Only the blow-up diagnostics
    /// use this, to reproduce what an infeasible alpha does.
    #[serde(default)]
    pub unchecked: bool,
}

impl CarrMadanConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "alpha must be > 0, got {alpha}"
            )));
        }
        Ok(CarrMadanConfig {
            alpha,
            unchecked: false,
        })
    }

    pub fn unchecked(alpha: f64) -> Result<Self> {
        let mut c = Self::new(alpha)?;
        c.unchecked = true;
        Ok(c)
    }

    pub(crate) fn check(&self, model: &ModelParams) -> Result<()> {
        Self::new(self.alpha)?;
        if self.unchecked {
            return Ok(());
        }
        match model.alpha_max() {
            Some(alpha_max) if self.alpha >= alpha_max => Err(PricingError::AlphaInfeasible {
                alpha: self.alpha,
                alpha_max,
            }),
            _ => Ok(()),
        }
    }
}

/// `psi(w - (alpha+1)i) / (alpha^2 + alpha - w^2 + i(2alpha+1)w)`.
#[inline]
pub(crate) fn damped_transform(cf: &CountingCf, alpha: f64, w: f64) -> Complex64 {
    let psi = cf.eval(Complex64::new(w, -(alpha + 1.0)));
    let den = Complex64::new(alpha * alpha + alpha - w * w, (2.0 * alpha + 1.0) * w);
    psi / den
}

/// The damped Carr-Madan integral, trapezoid over `0..=W`, all strikes
/// sharing one set of node values.
pub fn price_carr_madan(
    model: &ModelParams,
    market: &MarketParams,
    req: &PricingRequest,
    grid: &FourierGrid,
    cfg: &CarrMadanConfig,
) -> Result<PriceVector> {
    req.validate()?;
    cfg.check(model)?;
    let cf = CountingCf::new(model, market, req.t)?;
    let alpha = cfg.alpha;

    let mut coeffs = Vec::with_capacity(grid.n + 1);
    for j in 0..=grid.n {
        let w = grid.node(j);
        let a = damped_transform(&cf, alpha, w) * grid.weight(j);
        if !finite(a) {
            return Err(PricingError::NonFiniteIntegrand { w });
        }
        coeffs.push(a);
    }

    let (unique, index) = req.distinct();
    let dw = grid.step();
    let logs: Vec<f64> = unique.iter().map(|k| k.ln()).collect();
    let values: Vec<f64> = logs
        .iter()
        .zip(phase_sums(&coeffs, 0, dw, &logs))
        .map(|(&k, sum)| (-alpha * k - market.r * req.t).exp() / PI * sum)
        .collect();
    check_values(&values, "cm-opt")?;
    Ok(PriceVector::fan_out(
        Method::CmOpt,
        req,
        &index,
        &values,
        GridUsed::Quadrature(*grid),
        cf.count(),
    ))
}
