use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Heston stochastic variance with lognormal price jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatesParams {
    /// Initial variance.
    pub v0: f64,
    /// Long-run variance.
    pub v_bar: f64,
    /// Mean-reversion speed of the variance.
    pub a: f64,
    /// Volatility of variance.
    pub eta: f64,
    /// Correlation between price and variance shocks.
    pub rho: f64,
    /// Jump intensity per year.
    pub lambda: f64,
    /// Mean relative jump size; ln(1 + J) ~ N(ln(1 + mu_j) - nu_j^2/2, nu_j).
    pub mu_j: f64,
    /// Standard deviation of the log jump size.
    pub nu_j: f64,
}

impl BatesParams {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [
            self.v0, self.v_bar, self.a, self.eta, self.rho, self.lambda, self.mu_j, self.nu_j,
        ]
        .iter()
        .all(|x| x.is_finite());
        let fail = |msg: &str| Err(PricingError::InvalidParams(format!("bates: {msg}")));
        if !all_finite {
            return fail("parameters must be finite");
        }
        if self.v0 < 0.0 || self.v_bar < 0.0 {
            return fail("v0 and v_bar must be >= 0");
        }
        if self.a <= 0.0 || self.eta <= 0.0 {
            return fail("a and eta must be > 0");
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return fail("rho must lie in [-1, 1]");
        }
        if self.lambda < 0.0 || self.nu_j < 0.0 {
            return fail("lambda and nu_j must be >= 0");
        }
        if self.mu_j <= -1.0 {
            return fail("mu_j must be > -1");
        }
        Ok(())
    }
}

/// Gatheral's form of the Heston exponent, which keeps the complex logarithm
/// on its principal branch, times the Merton-style jump factor.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BatesKernel {
    p: BatesParams,
    t: f64,
    drift: f64,
    ln_jump_mean: f64,
}

impl BatesKernel {
    pub(crate) fn new(p: &BatesParams, r: f64, t: f64) -> Self {
        BatesKernel {
            p: *p,
            t,
            drift: (r - p.lambda * p.mu_j) * t,
            ln_jump_mean: (1.0 + p.mu_j).ln(),
        }
    }

    pub(crate) fn log_increment(&self, w: Complex64) -> Complex64 {
        let p = &self.p;
        let t = self.t;
        let one = Complex64::new(1.0, 0.0);
        let iw = Complex64::i() * w;
        let eta2 = p.eta * p.eta;

        let alpha = -0.5 * w * w - 0.5 * iw;
        let beta = p.a - p.rho * p.eta * iw;
        let gamma = 0.5 * eta2;
        let h = (beta * beta - 4.0 * alpha * gamma).sqrt();
        let r_minus = (beta - h) / eta2;
        let r_plus = (beta + h) / eta2;
        let g = r_minus / r_plus;
        let decay = (-h * t).exp();
        let denom = one - g * decay;

        let c = p.a * (r_minus * t - (2.0 / eta2) * (denom / (one - g)).ln());
        let d = r_minus * (one - decay) / denom;
        let jump = p.lambda
            * t
            * ((iw * self.ln_jump_mean).exp() * (0.5 * p.nu_j * p.nu_j * iw * (iw - 1.0)).exp()
                - 1.0);

        c * p.v_bar + d * p.v0 + jump + iw * self.drift
    }
}
