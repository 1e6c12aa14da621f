//! Convergence searches, the timing harness and the blow-up diagnostics.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::models::{MarketParams, ModelKind, ModelParams};
use crate::pricers::{
    classify_call, price, price_attari, price_carr_madan, price_cos, price_dpd_vec, price_fft,
    price_fft_sa, CarrMadanConfig, EngineConfig, Feasibility, FftConfig, Method, PricingRequest,
};
use crate::reference::{
    bsm_closed_form, dual_method_references, Partner, ReferenceCache, ReferenceQuote,
};
use crate::report::{BlowupRow, CurveRow, PlotRow, TimingRow};
use crate::transforms::FourierGrid;

/// Largest N any search will try.
pub const N_CAP: usize = 1 << 24;
/// Largest integration limit tried by the domain search.
pub const DOMAIN_CAP: f64 = 1e8;
/// Largest COS scale tried by the domain search.
pub const L_CAP: f64 = 64.0;
/// Relative width at which the domain bisection stops.
pub const DOMAIN_RESOLUTION: f64 = 0.01;
pub const BATCH_SIZES: [usize; 6] = [1, 10, 25, 100, 500, 2500];
/// Strike batches are drawn from this window of `K / S0`.
pub const MONEYNESS: (f64, f64) = (0.6, 1.4);

/// An option with a trusted price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionQuote {
    pub k: f64,
    pub t: f64,
    pub reference: f64,
}

/// The grid a dual-method reference is computed on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRecipe {
    pub domain: f64,
    pub n: usize,
    pub partner: Partner,
}

impl ReferenceRecipe {
    /// Generous grids, well past truncation convergence for every preset at
    /// 1e-10. Short AVG maturities need by far the widest range.
    pub fn for_case(model: &ModelParams, t: f64) -> ReferenceRecipe {
        let partner = match model.alpha_max() {
            Some(a) if a <= 1.5 => Partner::DpdOpt,
            Some(a) => Partner::CarrMadan {
                alpha: (0.5 * a).min(0.75),
            },
            None => Partner::CarrMadan { alpha: 1.75 },
        };
        // the DPD integrand decays one power of w slower than Carr-Madan's
        let (domain, n) = match (model.kind(), partner) {
            (ModelKind::Avg, Partner::DpdOpt) if t < 0.5 => (1.2e6, 1 << 24),
            (ModelKind::Avg, _) if t < 0.5 => (2e5, 1 << 22),
            _ => (2000.0, 1 << 17),
        };
        ReferenceRecipe { domain, n, partner }
    }
}

/// Reference prices for every (strike, tenor) pair: the closed form for
/// Black-Scholes, the dual-method oracle otherwise. Quotes already in the
/// cache are reused and new ones stored.
pub fn reference_quotes(
    model: &ModelParams,
    market: &MarketParams,
    strikes: &[f64],
    tenors: &[f64],
    mut cache: Option<&mut ReferenceCache>,
) -> Result<Vec<OptionQuote>> {
    let mut out = Vec::with_capacity(strikes.len() * tenors.len());
    for &t in tenors {
        let quotes = match model {
            ModelParams::Bsm(p) => strikes
                .iter()
                .map(|&k| bsm_closed_form(market, p.sigma, k, t))
                .collect(),
            _ => dual_quotes(model, market, strikes, t, cache.as_deref_mut())?,
        };
        for (&k, q) in strikes.iter().zip(quotes) {
            out.push(OptionQuote {
                k,
                t,
                reference: q.value,
            });
        }
    }
    Ok(out)
}

fn dual_quotes(
    model: &ModelParams,
    market: &MarketParams,
    strikes: &[f64],
    t: f64,
    mut cache: Option<&mut ReferenceCache>,
) -> Result<Vec<ReferenceQuote>> {
    let mut quotes: Vec<Option<ReferenceQuote>> = strikes
        .iter()
        .map(|&k| cache.as_ref().and_then(|c| c.get(model, market, k, t)))
        .collect();
    let missing: Vec<usize> = (0..strikes.len()).filter(|&i| quotes[i].is_none()).collect();
    if !missing.is_empty() {
        let r = ReferenceRecipe::for_case(model, t);
        let ks: Vec<f64> = missing.iter().map(|&i| strikes[i]).collect();
        let fresh = dual_method_references(model, market, &ks, t, r.domain, r.n, r.partner)?;
        for (&i, q) in missing.iter().zip(fresh) {
            let q = q?;
            if let Some(c) = cache.as_mut() {
                c.insert(model, market, strikes[i], t, q)?;
            }
            quotes[i] = Some(q);
        }
    }
    Ok(quotes.into_iter().map(|q| q.expect("filled above")).collect())
}

/// Quotes grouped by maturity, first-seen order.
fn by_tenor(quotes: &[OptionQuote]) -> Vec<(f64, Vec<usize>)> {
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, q) in quotes.iter().enumerate() {
        match groups.iter_mut().find(|(t, _)| *t == q.t) {
            Some((_, idx)) => idx.push(i),
            None => groups.push((q.t, vec![i])),
        }
    }
    groups
}

/// Absolute error of `cfg` on every quote. Runs that blow up count as
/// infinite error; configuration errors are returned.
///
/// The FFT is measured free of interpolation: each strike is read from a
/// run whose grid passes through it, so only truncation and discretization
/// enter, as for the other engines.
pub fn option_errors(
    model: &ModelParams,
    market: &MarketParams,
    quotes: &[OptionQuote],
    cfg: &EngineConfig,
) -> Result<Vec<f64>> {
    let mut errors = vec![f64::INFINITY; quotes.len()];
    for (t, idx) in by_tenor(quotes) {
        let req = PricingRequest::new(t, idx.iter().map(|&i| quotes[i].k).collect())?;
        let run = match cfg.method {
            Method::Fft => {
                let fc = cfg.fft_config(model)?;
                // a window too narrow for the strikes is as good as no answer
                let reach = fc.k_max - fc.strike_step();
                if req.strikes.iter().any(|k| (k / market.s0).ln().abs() > reach) {
                    continue;
                }
                price_fft_sa(model, market, &req, &fc)
            }
            _ => price(model, market, &req, cfg),
        };
        match run {
            Ok(pv) => {
                for (&i, v) in idx.iter().zip(&pv.values) {
                    let e = (v - quotes[i].reference).abs();
                    errors[i] = if e.is_finite() { e } else { f64::INFINITY };
                }
            }
            Err(e) if e.is_blow_up() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(errors)
}

pub fn max_error(
    model: &ModelParams,
    market: &MarketParams,
    quotes: &[OptionQuote],
    cfg: &EngineConfig,
) -> Result<f64> {
    Ok(option_errors(model, market, quotes, cfg)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Smallest N at which every quote is within `tol`: doubling to bracket,
/// then integer bisection. The FFT only admits powers of two, so for it the
/// doubling result is final.
pub fn search_min_n(
    model: &ModelParams,
    market: &MarketParams,
    quotes: &[OptionQuote],
    template: &EngineConfig,
    tol: f64,
) -> Result<usize> {
    let ok = |n: usize| -> Result<bool> {
        Ok(max_error(model, market, quotes, &template.with_n(n))? <= tol)
    };
    let mut hi = 2;
    while !ok(hi)? {
        hi *= 2;
        if hi > N_CAP {
            return Err(PricingError::NoConvergence { tol, cap: N_CAP as f64 });
        }
    }
    if template.method.needs_power_of_two() {
        return Ok(hi);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest integration limit (or COS scale) at which every quote is within
/// `tol` with `n_sat` nodes: doubling, then bisection to 1% of the bracket.
pub fn search_min_domain(
    model: &ModelParams,
    market: &MarketParams,
    quotes: &[OptionQuote],
    template: &EngineConfig,
    tol: f64,
    n_sat: usize,
) -> Result<f64> {
    let (start, cap) = if template.method.is_cos() {
        (1.0, L_CAP)
    } else {
        (4.0, DOMAIN_CAP)
    };
    let cfg = template.with_n(n_sat);
    let ok = |d: f64| -> Result<bool> {
        Ok(max_error(model, market, quotes, &cfg.with_domain(d))? <= tol)
    };
    let mut hi = start;
    while !ok(hi)? {
        if hi >= cap {
            return Err(PricingError::NoConvergence { tol, cap });
        }
        hi = (2.0 * hi).min(cap);
    }
    if hi == start {
        return Ok(hi);
    }
    let mut lo = hi / 2.0;
    while hi - lo > DOMAIN_RESOLUTION * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Error curves over `N = 2^d`, one per quote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub method: Method,
    pub domain: f64,
    pub tol: f64,
    pub rows: Vec<CurveRow>,
    /// Smallest tested N with every quote within `tol`.
    pub min_n_at_tol: Option<usize>,
}

impl ConvergenceReport {
    pub fn plot_rows(&self) -> Vec<PlotRow> {
        self.rows.iter().map(PlotRow::from).collect()
    }

    /// Largest error over all quotes at each tested N.
    pub fn max_curve(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(n, _)| *n == r.n) {
                Some((_, e)) => *e = e.max(r.error),
                None => out.push((r.n, r.error)),
            }
        }
        out
    }
}

pub fn convergence_curves(
    model: &ModelParams,
    market: &MarketParams,
    quotes: &[OptionQuote],
    template: &EngineConfig,
    exponents: std::ops::RangeInclusive<u32>,
    tol: f64,
) -> Result<ConvergenceReport> {
    let mut rows = Vec::new();
    let mut min_n = None;
    for d in exponents {
        let n = 1usize << d;
        let errors = option_errors(model, market, quotes, &template.with_n(n))?;
        if min_n.is_none() && errors.iter().all(|&e| e <= tol) {
            min_n = Some(n);
        }
        for (q, error) in quotes.iter().zip(errors) {
            rows.push(CurveRow {
                method: template.method,
                domain: template.domain,
                k: q.k,
                t: q.t,
                n,
                error,
            });
        }
    }
    Ok(ConvergenceReport {
        method: template.method,
        domain: template.domain,
        tol,
        rows,
        min_n_at_tol: min_n,
    })
}

/// `size` strikes drawn uniformly from the moneyness window. The same seed
/// and size always give the same batch.
pub fn strike_batch(market: &MarketParams, size: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (size as u64).rotate_left(32));
    (0..size)
        .map(|_| market.s0 * rng.gen_range(MONEYNESS.0..=MONEYNESS.1))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimingConfig {
    pub runs: usize,
    pub warmup: usize,
    pub seed: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            runs: 100,
            warmup: 5,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub method: Method,
    pub domain: f64,
    /// The N found for `tol`.
    pub n: usize,
    pub tol: f64,
    pub rows: Vec<TimingRow>,
}

impl BenchReport {
    pub fn mean_ms(&self, batch: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.batch == batch).map(|r| r.mean_ms)
    }
}

/// The configuration a batch of `size` strikes is timed with. One FFT
/// yields only `n` prices, so a larger batch needs a longer transform over
/// the same domain.
pub fn batch_config(cfg: &EngineConfig, size: usize) -> EngineConfig {
    match cfg.method {
        Method::Fft | Method::FftSa => cfg.with_n(cfg.n.max(size.next_power_of_two())),
        _ => *cfg,
    }
}

/// Mean wall time of one pricing call per batch size. Runs on the calling
/// thread; references are not involved.
pub fn time_batches(
    model: &ModelParams,
    market: &MarketParams,
    t: f64,
    cfg: &EngineConfig,
    tol: f64,
    sizes: &[usize],
    timing: &TimingConfig,
) -> Result<BenchReport> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let req = PricingRequest::new(t, strike_batch(market, size, timing.seed))?;
        let cfg = batch_config(cfg, size);
        for _ in 0..timing.warmup {
            black_box(price(model, market, &req, &cfg)?);
        }
        let mut total = 0.0;
        for _ in 0..timing.runs.max(1) {
            let start = Instant::now();
            let pv = price(model, market, black_box(&req), &cfg)?;
            total += start.elapsed().as_secs_f64();
            black_box(pv);
        }
        rows.push(TimingRow {
            method: cfg.method,
            domain: cfg.domain,
            n: cfg.n,
            batch: size,
            mean_ms: 1e3 * total / timing.runs.max(1) as f64,
        });
    }
    Ok(BenchReport {
        method: cfg.method,
        domain: cfg.domain,
        n: cfg.n,
        tol,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaClass {
    Converged,
    Biased,
    BlownUp,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub alpha: f64,
    pub t: f64,
    pub k: f64,
    pub value: f64,
    pub error: f64,
    pub class: AlphaClass,
}

/// Carr-Madan on a fixed grid for each dampening value.
pub fn alpha_sweep(
    model: &ModelParams,
    market: &MarketParams,
    quotes: &[OptionQuote],
    alphas: &[f64],
    grid: &FourierGrid,
    tol: f64,
) -> Result<Vec<AlphaRow>> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        let cfg = CarrMadanConfig::new(alpha)?;
        for (t, idx) in by_tenor(quotes) {
            let req = PricingRequest::new(t, idx.iter().map(|&i| quotes[i].k).collect())?;
            let values = match price_carr_madan(model, market, &req, grid, &cfg) {
                Ok(pv) => Ok(pv.values),
                Err(PricingError::AlphaInfeasible { .. }) => Err(AlphaClass::Infeasible),
                Err(e) if e.is_blow_up() => Err(AlphaClass::BlownUp),
                Err(e) => return Err(e),
            };
            for (j, &i) in idx.iter().enumerate() {
                let q = quotes[i];
                let (value, class) = match &values {
                    Ok(v) => {
                        let v = v[j];
                        let class = if !classify_call(v, market, q.k, t).is_feasible() {
                            AlphaClass::BlownUp
                        } else if (v - q.reference).abs() <= tol {
                            AlphaClass::Converged
                        } else {
                            AlphaClass::Biased
                        };
                        (v, class)
                    }
                    Err(class) => (f64::NAN, *class),
                };
                rows.push(AlphaRow {
                    alpha,
                    t,
                    k: q.k,
                    value,
                    error: (value - q.reference).abs(),
                    class,
                });
            }
        }
    }
    Ok(rows)
}

/// The worst class any option received at `alpha`.
pub fn alpha_verdict(rows: &[AlphaRow], alpha: f64) -> Option<AlphaClass> {
    rows.iter()
        .filter(|r| r.alpha == alpha)
        .map(|r| r.class)
        .max()
}

/// Settings for [`blowup_matrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupConfig {
    pub n: usize,
    pub domain: f64,
    pub l_scale: f64,
    /// Dampening for the Carr-Madan rows, applied even where infeasible.
    pub alpha: f64,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        BlowupConfig {
            n: 1 << 24,
            domain: 1.2e6,
            l_scale: 12.0,
            alpha: 1.75,
        }
    }
}

/// Every engine on one model, with each value classified against the
/// no-arbitrage band. Failures are recorded, not returned.
pub fn blowup_matrix(
    model: &ModelParams,
    market: &MarketParams,
    strikes: &[f64],
    tenors: &[f64],
    cfg: &BlowupConfig,
) -> Result<Vec<BlowupRow>> {
    let grid = FourierGrid::new(cfg.domain, cfg.n)?;
    let cm = CarrMadanConfig::unchecked(cfg.alpha)?;
    let fft = FftConfig::from_domain(cfg.alpha, cfg.domain, cfg.n)?.unchecked();
    let methods = [
        Method::DpdOpt,
        Method::AtOpt,
        Method::CmOpt,
        Method::Fft,
        Method::CosOpt,
    ];
    let mut rows = Vec::new();
    for &t in tenors {
        let req = PricingRequest::new(t, strikes.to_vec())?;
        for method in methods {
            let run = match method {
                Method::DpdOpt => price_dpd_vec(model, market, &req, &grid),
                Method::AtOpt => price_attari(model, market, &req, &grid),
                Method::CmOpt => price_carr_madan(model, market, &req, &grid, &cm),
                Method::Fft => price_fft(model, market, &req, &fft),
                _ => price_cos(model, market, &req, cfg.l_scale, cfg.n),
            };
            let values = match run {
                Ok(pv) => pv.values,
                Err(e) if e.is_blow_up() => vec![f64::NAN; strikes.len()],
                Err(e) => return Err(e),
            };
            for (&k, value) in strikes.iter().zip(values) {
                rows.push(BlowupRow {
                    method,
                    n: cfg.n,
                    t,
                    k,
                    value,
                    feasibility: classify_call(value, market, k, t),
                });
            }
        }
    }
    Ok(rows)
}

/// True when only AT-OPT produced feasible values throughout.
pub fn only_attari_feasible(rows: &[BlowupRow]) -> bool {
    rows.iter().all(|r| {
        (r.method == Method::AtOpt) == (r.feasibility == Feasibility::Feasible)
    })
}
