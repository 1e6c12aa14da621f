use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_values, finite, CountingCf, GridUsed, Method, PriceVector, PricingRequest};
use crate::error::{PricingError, Result};
use crate::models::{log_moment_slope, MarketParams, ModelParams};
use crate::transforms::{phase_sum_pair, FourierGrid};

/// Weighted node coefficients of the two probability integrals.
struct DpdCoefficients {
    pi1: Vec<Complex64>,
    pi2: Vec<Complex64>,
}

/// Three characteristic-function evaluations per positive node:
/// `psi(w - i)`, `psi(-i)` and `psi(w)`.
fn coefficients(cf: &CountingCf, grid: &FourierGrid) -> Result<DpdCoefficients> {
    let i = Complex64::i();
    let mut pi1 = Vec::with_capacity(grid.n);
    let mut pi2 = Vec::with_capacity(grid.n);
    for j in 1..=grid.n {
        let w = grid.node(j);
        let shifted = cf.eval(Complex64::new(w, -1.0));
        let forward = cf.eval(Complex64::new(0.0, -1.0));
        let plain = cf.eval(Complex64::new(w, 0.0));
        let wt = grid.weight(j);
        let a1 = shifted / (forward * i * w) * wt;
        let a2 = plain / (i * w) * wt;
        if !(finite(a1) && finite(a2)) {
            return Err(PricingError::NonFiniteIntegrand { w });
        }
        pi1.push(a1);
        pi2.push(a2);
    }
    Ok(DpdCoefficients { pi1, pi2 })
}

struct Limits {
    /// Mean of ln S_T under the pricing and the share measure.
    mu0: f64,
    mu1: f64,
}

fn limits(cf: &CountingCf) -> Limits {
    Limits {
        mu0: log_moment_slope(cf.inner(), 0.0),
        mu1: log_moment_slope(cf.inner(), 1.0),
    }
}

/// `(C, Pi1, Pi2)` for one strike. The `w = 0` node takes the integrand
/// limits `mu1 - ln K` and `mu0 - ln K`.
fn price_one(
    c: &DpdCoefficients,
    lim: &Limits,
    grid: &FourierGrid,
    market: &MarketParams,
    t: f64,
    strike: f64,
) -> (f64, f64, f64) {
    let k = strike.ln();
    let dw = grid.step();
    let w0 = grid.weight(0);
    let (sum1, sum2) = phase_sum_pair(&c.pi1, &c.pi2, 1, dw, k);
    let s1 = w0 * (lim.mu1 - k) + sum1;
    let s2 = w0 * (lim.mu0 - k) + sum2;
    let p1 = 0.5 + s1 / PI;
    let p2 = 0.5 + s2 / PI;
    (market.s0 * p1 - market.discount(t) * strike * p2, p1, p2)
}

fn assemble(
    method: Method,
    req: &PricingRequest,
    index: &[usize],
    triples: &[(f64, f64, f64)],
    grid: &FourierGrid,
    evaluations: u64,
) -> Result<PriceVector> {
    let values: Vec<f64> = triples.iter().map(|t| t.0).collect();
    check_values(&values, method.tag())?;
    let mut out = PriceVector::fan_out(
        method,
        req,
        index,
        &values,
        GridUsed::Quadrature(*grid),
        evaluations,
    );
    out.pi1 = Some(index.iter().map(|&i| triples[i].1).collect());
    out.pi2 = Some(index.iter().map(|&i| triples[i].2).collect());
    Ok(out)
}

/// Delta-probability decomposition, one strike at a time: every strike
/// re-evaluates the characteristic function at every node.
pub fn price_dpd(
    model: &ModelParams,
    market: &MarketParams,
    req: &PricingRequest,
    grid: &FourierGrid,
) -> Result<PriceVector> {
    req.validate()?;
    let cf = CountingCf::new(model, market, req.t)?;
    let lim = limits(&cf);
    let (unique, index) = req.distinct();
    let mut triples = Vec::with_capacity(unique.len());
    for &k in &unique {
        let c = coefficients(&cf, grid)?;
        triples.push(price_one(&c, &lim, grid, market, req.t, k));
    }
    assemble(Method::Dpd, req, &index, &triples, grid, cf.count())
}

/// Strike-vectorised DPD: node values are computed once and shared.
pub fn price_dpd_vec(
    model: &ModelParams,
    market: &MarketParams,
    req: &PricingRequest,
    grid: &FourierGrid,
) -> Result<PriceVector> {
    req.validate()?;
    let cf = CountingCf::new(model, market, req.t)?;
    let lim = limits(&cf);
    let (unique, index) = req.distinct();
    let c = coefficients(&cf, grid)?;
    let triples: Vec<_> = unique
        .iter()
        .map(|&k| price_one(&c, &lim, grid, market, req.t, k))
        .collect();
    assemble(Method::DpdOpt, req, &index, &triples, grid, cf.count())
}
