use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::carr_madan::damped_transform;
use super::{
    check_values, finite, CarrMadanConfig, CountingCf, GridUsed, Method, PriceVector,
    PricingRequest,
};
use crate::error::{PricingError, Result};
use crate::models::{MarketParams, ModelParams};
use crate::transforms::{FftPlan, FourierGrid};

/// Two log-strikes closer than this are the same grid node.
const ON_GRID: f64 = 1e-12;

/// Carr-Madan FFT layout. The strike spacing is `2 k_max / n` and, by the
/// Nyquist relation, the frequency spacing is `pi / k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FftConfig {
    pub alpha: f64,
    pub k_max: f64,
    pub n: usize,
    /// See [`CarrMadanConfig::unchecked`].
    #[serde(default)]
    pub unchecked: bool,
}

impl FftConfig {
    pub fn new(alpha: f64, k_max: f64, n: usize) -> Result<Self> {
        CarrMadanConfig::new(alpha)?;
        if !(k_max.is_finite() && k_max > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "k_max must be > 0, got {k_max}"
            )));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(PricingError::BadLength(n));
        }
        Ok(FftConfig {
            alpha,
            k_max,
            n,
            unchecked: false,
        })
    }

    /// Same layout without the AVG dampening gate.
    pub fn unchecked(mut self) -> Self {
        self.unchecked = true;
        self
    }

    /// The layout whose frequency grid spans `(0, w_max]` with `n` steps.
    pub fn from_domain(alpha: f64, w_max: f64, n: usize) -> Result<Self> {
        if !(w_max.is_finite() && w_max > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "domain must be > 0, got {w_max}"
            )));
        }
        Self::new(alpha, n as f64 * PI / w_max, n)
    }

    pub fn strike_step(&self) -> f64 {
        2.0 * self.k_max / self.n as f64
    }

    pub fn frequency_step(&self) -> f64 {
        PI / self.k_max
    }

    pub fn grid(&self) -> FourierGrid {
        FourierGrid {
            w_max: self.n as f64 * self.frequency_step(),
            n: self.n,
        }
    }
}

/// Damped transform at the `n + 1` grid nodes, trapezoid weights applied.
struct Transform {
    values: Vec<Complex64>,
    evaluations: u64,
}

fn transform(
    model: &ModelParams,
    market: &MarketParams,
    t: f64,
    cfg: &FftConfig,
) -> Result<Transform> {
    CarrMadanConfig {
        alpha: cfg.alpha,
        unchecked: cfg.unchecked,
    }
    .check(model)?;
    let cf = CountingCf::new(model, market, t)?;
    let grid = cfg.grid();
    let mut values = Vec::with_capacity(cfg.n + 1);
    for j in 0..=cfg.n {
        let w = grid.node(j);
        let v = damped_transform(&cf, cfg.alpha, w) * grid.weight(j);
        if !finite(v) {
            return Err(PricingError::NonFiniteIntegrand { w });
        }
        values.push(v);
    }
    Ok(Transform {
        values,
        evaluations: cf.count(),
    })
}

/// Prices on the log-strike grid `k0 + m dk`, `m = 0..n`.
///
/// The last frequency node `w_n = n dw` has phase `e^{-i w_n k0}` at every
/// strike, so it is added after the transform and the result is exactly the
/// trapezoid over `[0, n dw]` that the direct Carr-Madan engine computes.
fn run(tr: &Transform, plan: &FftPlan, cfg: &FftConfig, k0: f64, r: f64, t: f64) -> Result<Vec<f64>> {
    let n = cfg.n;
    let dw = cfg.frequency_step();
    let dk = cfg.strike_step();
    let mut x: Vec<Complex64> = tr.values[..n]
        .iter()
        .enumerate()
        .map(|(j, v)| v * Complex64::from_polar(1.0, -(j as f64) * dw * k0))
        .collect();
    let tail = tr.values[n] * Complex64::from_polar(1.0, -(n as f64) * dw * k0);
    plan.process(&mut x)?;
    let prices: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(m, y)| {
            let k = k0 + m as f64 * dk;
            (-cfg.alpha * k - r * t).exp() / PI * (y + tail).re
        })
        .collect();
    check_values(&prices, "fft")?;
    Ok(prices)
}

fn interpolate(prices: &[f64], k0: f64, dk: f64, k: f64) -> Result<(f64, bool)> {
    let pos = (k - k0) / dk;
    let nearest = pos.round();
    if nearest >= 0.0 && (nearest as usize) < prices.len() && ((nearest - pos) * dk).abs() < ON_GRID
    {
        return Ok((prices[nearest as usize], false));
    }
    let lo = pos.floor();
    if lo < 0.0 || lo as usize + 1 >= prices.len() {
        return Err(PricingError::InvalidParams(format!(
            "strike {} lies outside the FFT window [{}, {}]",
            k.exp(),
            k0.exp(),
            (k0 + (prices.len() - 1) as f64 * dk).exp()
        )));
    }
    let i = lo as usize;
    let frac = pos - lo;
    let (c0, c1) = (prices[i], prices[i + 1]);
    let v = if c0 > 0.0 && c1 > 0.0 {
        (c0.ln() * (1.0 - frac) + c1.ln() * frac).exp()
    } else {
        c0 * (1.0 - frac) + c1 * frac
    };
    Ok((v, true))
}

/// Carr-Madan through one FFT, strikes centred on `S0`. Requested strikes
/// off the grid are log-linearly interpolated and flagged.
pub fn price_fft(
    model: &ModelParams,
    market: &MarketParams,
    req: &PricingRequest,
    cfg: &FftConfig,
) -> Result<PriceVector> {
    req.validate()?;
    FftConfig::new(cfg.alpha, cfg.k_max, cfg.n)?;
    let cfg = *cfg;
    let tr = transform(model, market, req.t, &cfg)?;
    let plan = FftPlan::new(cfg.n)?;
    let k0 = market.s0.ln() - cfg.k_max;
    let dk = cfg.strike_step();
    let prices = run(&tr, &plan, &cfg, k0, market.r, req.t)?;

    let mut values = Vec::with_capacity(req.strikes.len());
    let mut flags = Vec::with_capacity(req.strikes.len());
    for &strike in &req.strikes {
        let (v, interp) = interpolate(&prices, k0, dk, strike.ln())?;
        values.push(v);
        flags.push(interp);
    }
    Ok(PriceVector {
        method: Method::Fft,
        kind: super::OptionKind::Call,
        t: req.t,
        strikes: req.strikes.clone(),
        values,
        interpolated: flags,
        grid: GridUsed::Fft {
            grid: cfg.grid(),
            k_max: cfg.k_max,
            runs: 1,
        },
        cf_evaluations: tr.evaluations,
        pi1: None,
        pi2: None,
    })
}

/// Groups log-strikes into FFT runs. Each run is anchored at the smallest
/// uncovered strike and collects every other strike a whole number of
/// strike steps away that still fits in the window.
pub(crate) fn partition_runs(
    log_strikes: &[f64],
    base: f64,
    dk: f64,
    n: usize,
) -> Result<Vec<(f64, Vec<usize>)>> {
    let mut order: Vec<usize> = (0..log_strikes.len()).collect();
    order.sort_by(|&a, &b| log_strikes[a].total_cmp(&log_strikes[b]));
    let mut covered = vec![false; log_strikes.len()];
    let mut runs = Vec::new();
    for &anchor in &order {
        if covered[anchor] {
            continue;
        }
        let ka = log_strikes[anchor];
        // shift the default grid so one node lands on the anchor
        let slot = ((ka - base) / dk).round();
        if slot < 0.0 || slot >= n as f64 {
            return Err(PricingError::InvalidParams(format!(
                "strike {} lies outside the FFT window [{}, {}]",
                ka.exp(),
                base.exp(),
                (base + (n - 1) as f64 * dk).exp()
            )));
        }
        let k0 = ka - slot * dk;
        let mut members = Vec::new();
        for &j in &order {
            if covered[j] {
                continue;
            }
            let pos = (log_strikes[j] - k0) / dk;
            let m = pos.round();
            if m >= 0.0 && (m as usize) < n && ((m - pos) * dk).abs() < ON_GRID {
                covered[j] = true;
                members.push(j);
            }
        }
        runs.push((k0, members));
    }
    Ok(runs)
}

/// Strike-adjusted FFT: as many runs as it takes for every requested strike
/// to sit exactly on a grid node. Nothing is interpolated.
pub fn price_fft_sa(
    model: &ModelParams,
    market: &MarketParams,
    req: &PricingRequest,
    cfg: &FftConfig,
) -> Result<PriceVector> {
    req.validate()?;
    FftConfig::new(cfg.alpha, cfg.k_max, cfg.n)?;
    let cfg = *cfg;
    let tr = transform(model, market, req.t, &cfg)?;
    let plan = FftPlan::new(cfg.n)?;
    let dk = cfg.strike_step();
    let base = market.s0.ln() - cfg.k_max;

    let (unique, index) = req.distinct();
    let logs: Vec<f64> = unique.iter().map(|k| k.ln()).collect();
    let runs = partition_runs(&logs, base, dk, cfg.n)?;
    let mut unique_values = vec![f64::NAN; unique.len()];
    for (k0, members) in &runs {
        let prices = run(&tr, &plan, &cfg, *k0, market.r, req.t)?;
        for &j in members {
            let m = ((logs[j] - k0) / dk).round() as usize;
            unique_values[j] = prices[m];
        }
    }
    Ok(PriceVector::fan_out(
        Method::FftSa,
        req,
        &index,
        &unique_values,
        GridUsed::Fft {
            grid: cfg.grid(),
            k_max: cfg.k_max,
            runs: runs.len(),
        },
        tr.evaluations,
    ))
}
