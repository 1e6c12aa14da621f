use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_values, finite, CountingCf, GridUsed, Method, PriceVector, PricingRequest};
use crate::error::{PricingError, Result};
use crate::models::{cumulants, MarketParams, ModelParams};
use crate::transforms::phase_sums;

/// Fourier-cosine expansion of the call price, many strikes at once.
///
/// The truncation range of `ln(S_T/K)` is `c1 -+ L sqrt(c2 + sqrt(c4))`,
/// without `c4` for Bates. Its width does not depend on the strike and, in
/// terms of `ln S_T`, neither does its position, so the series coefficients
/// `Re[psi(u_n) e^{-i u_n (k + a)}]` are computed once. Each strike then
/// only needs the closed-form call payoff coefficients, which reduce to one
/// phase sum.
pub fn price_cos(
    model: &ModelParams,
    market: &MarketParams,
    req: &PricingRequest,
    l_scale: f64,
    n_terms: usize,
) -> Result<PriceVector> {
    req.validate()?;
    if !(l_scale.is_finite() && l_scale > 0.0) {
        return Err(PricingError::InvalidParams(format!(
            "COS scale L must be > 0, got {l_scale}"
        )));
    }
    if n_terms < 2 {
        return Err(PricingError::InvalidParams(format!(
            "COS needs at least 2 terms, got {n_terms}"
        )));
    }
    let cf = CountingCf::new(model, market, req.t)?;
    // cumulants at K = S0 are those of ln(S_T/S0)
    let cum = cumulants(model, market, req.t, market.s0)?;
    let c4 = if cf.inner().ignores_fourth_cumulant() {
        0.0
    } else {
        cum.c4.max(0.0)
    };
    let half = l_scale * (cum.c2.max(0.0) + c4.sqrt()).sqrt();
    if !(half.is_finite() && half > 0.0) {
        return Err(PricingError::NonFiniteResult(format!(
            "COS truncation half-width {half}"
        )));
    }
    let width = 2.0 * half;
    let du = PI / width;
    // lower end of the range in ln S_T
    let x_lo = cf.inner().log_spot() + cum.c1 - half;

    // A_n, and B_n = A_n / (1 + u_n^2)
    let mut a_coef = Vec::with_capacity(n_terms);
    for n in 0..n_terms {
        let u = n as f64 * du;
        let psi = cf.eval(Complex64::new(u, 0.0));
        let v = (psi * Complex64::from_polar(1.0, -u * x_lo)).re;
        if !v.is_finite() {
            return Err(PricingError::NonFiniteIntegrand { w: u });
        }
        a_coef.push(v);
    }
    let prime = |n: usize| if n == 0 { 0.5 } else { 1.0 };
    let mut even_odd = 0.0;
    let mut plain = 0.0;
    let mut mixed = Vec::with_capacity(n_terms);
    for (n, &a) in a_coef.iter().enumerate() {
        let u = n as f64 * du;
        let b = a / (1.0 + u * u);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        even_odd += prime(n) * sign * b;
        plain += prime(n) * b;
        let chi_part = -Complex64::new(b, -b * u) * prime(n);
        let psi_part = if n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -a / u)
        };
        let d = chi_part + psi_part;
        if !finite(d) {
            return Err(PricingError::NonFiniteIntegrand { w: u });
        }
        mixed.push(d);
    }
    let a0 = a_coef[0];

    let (unique, index) = req.distinct();
    let df = market.discount(req.t);
    let ranges: Vec<(f64, f64)> = unique
        .iter()
        .map(|&strike| {
            let a = (market.s0 / strike).ln() + cum.c1 - half;
            (a, a + width)
        })
        .collect();
    // only ranges straddling zero need the series over the payoff kink
    let straddling: Vec<f64> = ranges
        .iter()
        .filter(|(a, b)| *a < 0.0 && *b > 0.0)
        .map(|r| r.0)
        .collect();
    let mut kinked = phase_sums(&mixed, 0, du, &straddling).into_iter();
    let values: Vec<f64> = unique
        .iter()
        .zip(&ranges)
        .map(|(&strike, &(a, b))| {
            let total = if b <= 0.0 {
                0.0
            } else if a >= 0.0 {
                b.exp() * even_odd - a.exp() * plain - 0.5 * a0 * (b - a)
            } else {
                let series = kinked.next().expect("one sum per straddling range");
                b.exp() * even_odd - 0.5 * a0 * b + series
            };
            df * 2.0 * strike / width * total
        })
        .collect();
    check_values(&values, "cos-opt")?;
    Ok(PriceVector::fan_out(
        Method::CosOpt,
        req,
        &index,
        &values,
        GridUsed::Cos {
            n_terms,
            l_scale,
            ranges,
        },
        cf.count(),
    ))
}
