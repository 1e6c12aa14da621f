use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_values, finite, CountingCf, GridUsed, Method, PriceVector, PricingRequest};
use crate::error::{PricingError, Result};
use crate::models::{log_moment_slope, MarketParams, ModelParams};
use crate::transforms::{phase_sums, FourierGrid};

/// Attari's single integral. Its integrand is
/// `Re[e^{-iwk} psi(w) (1 - i/w)] / (1 + w^2)`, which tends to
/// `1 + E[ln S_T] - k` at the origin.
pub fn price_attari(
    model: &ModelParams,
    market: &MarketParams,
    req: &PricingRequest,
    grid: &FourierGrid,
) -> Result<PriceVector> {
    req.validate()?;
    let cf = CountingCf::new(model, market, req.t)?;
    let mu0 = log_moment_slope(cf.inner(), 0.0);
    let i = Complex64::i();

    let mut coeffs = Vec::with_capacity(grid.n);
    for j in 1..=grid.n {
        let w = grid.node(j);
        let psi = cf.eval(Complex64::new(w, 0.0));
        let a = psi * (1.0 - i / w) * (grid.weight(j) / (1.0 + w * w));
        if !finite(a) {
            return Err(PricingError::NonFiniteIntegrand { w });
        }
        coeffs.push(a);
    }

    let (unique, index) = req.distinct();
    let dw = grid.step();
    let df = market.discount(req.t);
    let logs: Vec<f64> = unique.iter().map(|k| k.ln()).collect();
    let sums = phase_sums(&coeffs, 1, dw, &logs);
    let values: Vec<f64> = unique
        .iter()
        .zip(logs.iter().zip(sums))
        .map(|(&strike, (&k, sum))| {
            let s = grid.weight(0) * (1.0 + mu0 - k) + sum;
            market.s0 - df * strike * (0.5 + s / PI)
        })
        .collect();
    check_values(&values, "at-opt")?;
    Ok(PriceVector::fan_out(
        Method::AtOpt,
        req,
        &index,
        &values,
        GridUsed::Quadrature(*grid),
        cf.count(),
    ))
}
