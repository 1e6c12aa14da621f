//! The seven pricing engines, put-call parity and no-arbitrage checks.

mod attari;
mod carr_madan;
mod cos;
mod dpd;
mod fft;

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::models::{validate_maturity, CharacteristicFunction, MarketParams, ModelParams};
use crate::transforms::FourierGrid;

pub use attari::price_attari;
pub use carr_madan::{price_carr_madan, CarrMadanConfig};
pub use cos::price_cos;
pub use dpd::{price_dpd, price_dpd_vec};
pub use fft::{price_fft, price_fft_sa, FftConfig};

/// Dampening used for BSM and Bates when none is given.
pub const DEFAULT_ALPHA: f64 = 1.75;

/// Slack on the no-arbitrage band.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PricingRequest {
    pub t: f64,
    pub strikes: Vec<f64>,
}

impl PricingRequest {
    pub fn new(t: f64, strikes: Vec<f64>) -> Result<Self> {
        let r = PricingRequest { t, strikes };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        validate_maturity(self.t)?;
        if self.strikes.is_empty() {
            return Err(PricingError::InvalidParams("no strikes requested".into()));
        }
        if let Some(k) = self.strikes.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
            return Err(PricingError::InvalidParams(format!(
                "strikes must be > 0, got {k}"
            )));
        }
        Ok(())
    }

    /// Sorted distinct strikes plus, for each requested strike, its position
    /// in that list.
    pub(crate) fn distinct(&self) -> (Vec<f64>, Vec<usize>) {
        let mut unique = self.strikes.clone();
        unique.sort_by(f64::total_cmp);
        unique.dedup();
        let index = self
            .strikes
            .iter()
            .map(|k| unique.binary_search_by(|u| u.total_cmp(k)).expect("present"))
            .collect();
        (unique, index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "dpd")]
    Dpd,
    #[serde(rename = "dpd-opt")]
    DpdOpt,
    #[serde(rename = "at-opt")]
    AtOpt,
    #[serde(rename = "cos-opt")]
    CosOpt,
    #[serde(rename = "cm-opt")]
    CmOpt,
    #[serde(rename = "fft")]
    Fft,
    #[serde(rename = "fft-sa")]
    FftSa,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Dpd,
        Method::DpdOpt,
        Method::AtOpt,
        Method::CosOpt,
        Method::CmOpt,
        Method::Fft,
        Method::FftSa,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::Dpd => "dpd",
            Method::DpdOpt => "dpd-opt",
            Method::AtOpt => "at-opt",
            Method::CosOpt => "cos-opt",
            Method::CmOpt => "cm-opt",
            Method::Fft => "fft",
            Method::FftSa => "fft-sa",
        }
    }

    /// Carr-Madan based engines take a dampening parameter.
    pub fn is_damped(&self) -> bool {
        matches!(self, Method::CmOpt | Method::Fft | Method::FftSa)
    }

    pub fn is_cos(&self) -> bool {
        matches!(self, Method::CosOpt)
    }

    /// FFT grids must be powers of two.
    pub fn needs_power_of_two(&self) -> bool {
        matches!(self, Method::Fft | Method::FftSa)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = PricingError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "dpd" => Method::Dpd,
            "dpd-opt" | "dpdopt" => Method::DpdOpt,
            "at" | "at-opt" | "attari" => Method::AtOpt,
            "cos" | "cos-opt" => Method::CosOpt,
            "cm" | "cm-opt" | "carr-madan" => Method::CmOpt,
            "fft" => Method::Fft,
            "fft-sa" | "fftsa" => Method::FftSa,
            other => {
                return Err(PricingError::InvalidParams(format!(
                    "unknown method '{other}'"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        })
    }
}

/// The discretization an engine actually ran with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridUsed {
    Quadrature(FourierGrid),
    Cos {
        n_terms: usize,
        l_scale: f64,
        /// Truncation range of `ln(S_T/K)` for each distinct strike.
        ranges: Vec<(f64, f64)>,
    },
    Fft {
        grid: FourierGrid,
        k_max: f64,
        runs: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceVector {
    pub method: Method,
    pub kind: OptionKind,
    pub t: f64,
    pub strikes: Vec<f64>,
    pub values: Vec<f64>,
    /// Set where an FFT price was read between grid nodes.
    pub interpolated: Vec<bool>,
    pub grid: GridUsed,
    /// Characteristic-function evaluations at quadrature nodes or series terms.
    pub cf_evaluations: u64,
    /// DPD by-products: the option delta and the exercise probability.
    pub pi1: Option<Vec<f64>>,
    pub pi2: Option<Vec<f64>>,
}

impl PriceVector {
    pub(crate) fn fan_out(
        method: Method,
        req: &PricingRequest,
        index: &[usize],
        unique_values: &[f64],
        grid: GridUsed,
        cf_evaluations: u64,
    ) -> Self {
        PriceVector {
            method,
            kind: OptionKind::Call,
            t: req.t,
            strikes: req.strikes.clone(),
            values: index.iter().map(|&i| unique_values[i]).collect(),
            interpolated: vec![false; req.strikes.len()],
            grid,
            cf_evaluations,
            pi1: None,
            pi2: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Bound check on every call value.
    pub fn feasibility(&self, market: &MarketParams) -> Vec<Feasibility> {
        let calls = match self.kind {
            OptionKind::Call => self.values.clone(),
            OptionKind::Put => call_from_parity(self, market).values,
        };
        self.strikes
            .iter()
            .zip(calls)
            .map(|(&k, c)| classify_call(c, market, k, self.t))
            .collect()
    }
}

/// Where a call value sits relative to `max(S0 - K e^{-rT}, 0) <= C <= S0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feasibility {
    Feasible,
    Negative,
    BelowIntrinsic,
    AboveSpot,
    NonFinite,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Feasibility::Feasible => "feasible",
            Feasibility::Negative => "negative",
            Feasibility::BelowIntrinsic => "below-intrinsic",
            Feasibility::AboveSpot => "above-spot",
            Feasibility::NonFinite => "non-finite",
        }
    }
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

pub fn classify_call(c: f64, market: &MarketParams, k: f64, t: f64) -> Feasibility {
    if !c.is_finite() {
        return Feasibility::NonFinite;
    }
    if c < -BOUND_TOLERANCE {
        return Feasibility::Negative;
    }
    if c > market.s0 + BOUND_TOLERANCE {
        return Feasibility::AboveSpot;
    }
    let intrinsic = (market.s0 - k * market.discount(t)).max(0.0);
    if c < intrinsic - BOUND_TOLERANCE {
        return Feasibility::BelowIntrinsic;
    }
    Feasibility::Feasible
}

/// `P = C - S0 + K e^{-rT}` strike by strike.
pub fn put_from_parity(call: &PriceVector, market: &MarketParams) -> PriceVector {
    assert_eq!(call.kind, OptionKind::Call, "expected call prices");
    let df = market.discount(call.t);
    let mut out = call.clone();
    out.kind = OptionKind::Put;
    for (v, &k) in out.values.iter_mut().zip(&call.strikes) {
        *v = *v - market.s0 + k * df;
    }
    out
}

/// `C = P + S0 - K e^{-rT}` strike by strike.
pub fn call_from_parity(put: &PriceVector, market: &MarketParams) -> PriceVector {
    assert_eq!(put.kind, OptionKind::Put, "expected put prices");
    let df = market.discount(put.t);
    let mut out = put.clone();
    out.kind = OptionKind::Call;
    for (v, &k) in out.values.iter_mut().zip(&put.strikes) {
        *v = *v + market.s0 - k * df;
    }
    out
}

/// Characteristic function with an evaluation counter.
pub(crate) struct CountingCf {
    cf: CharacteristicFunction,
    count: Cell<u64>,
}

impl CountingCf {
    pub(crate) fn new(model: &ModelParams, market: &MarketParams, t: f64) -> Result<Self> {
        Ok(CountingCf {
            cf: CharacteristicFunction::new(model, market, t)?,
            count: Cell::new(0),
        })
    }

    #[inline]
    pub(crate) fn eval(&self, w: Complex64) -> Complex64 {
        self.count.set(self.count.get() + 1);
        self.cf.eval(w)
    }

    pub(crate) fn inner(&self) -> &CharacteristicFunction {
        &self.cf
    }

    pub(crate) fn count(&self) -> u64 {
        self.count.get()
    }
}

#[inline]
pub(crate) fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub(crate) fn check_values(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(PricingError::NonFiniteResult(what.to_string()))
    }
}

/// Everything needed to run one engine: the method plus its discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub method: Method,
    /// Integration upper limit W, or the COS scale L.
    pub domain: f64,
    /// Grid intervals, FFT length or number of cosine terms.
    pub n: usize,
    pub alpha: Option<f64>,
    /// FFT half-width of the log-strike window; derived from the domain
    /// when absent.
    pub k_max: Option<f64>,
}

impl EngineConfig {
    pub fn new(method: Method, domain: f64, n: usize) -> Self {
        EngineConfig {
            method,
            domain,
            n,
            alpha: None,
            k_max: None,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_domain(mut self, domain: f64) -> Self {
        self.domain = domain;
        self
    }

    /// The dampening to use, falling back to the default where the model
    /// allows it.
    pub fn resolved_alpha(&self, model: &ModelParams) -> Result<f64> {
        match (self.alpha, model) {
            (Some(a), _) => Ok(a),
            (None, ModelParams::Avg(_)) => Err(PricingError::InvalidParams(format!(
                "{} on the AVG model needs an explicit alpha (alpha_max = {})",
                self.method,
                model.alpha_max().unwrap_or(f64::NAN)
            ))),
            (None, _) => Ok(DEFAULT_ALPHA),
        }
    }

    pub fn fft_config(&self, model: &ModelParams) -> Result<FftConfig> {
        let alpha = self.resolved_alpha(model)?;
        match self.k_max {
            Some(k_max) => FftConfig::new(alpha, k_max, self.n),
            None => FftConfig::from_domain(alpha, self.domain, self.n),
        }
    }
}

/// Runs whichever engine `cfg` names.
pub fn price(
    model: &ModelParams,
    market: &MarketParams,
    req: &PricingRequest,
    cfg: &EngineConfig,
) -> Result<PriceVector> {
    match cfg.method {
        Method::CosOpt => price_cos(model, market, req, cfg.domain, cfg.n),
        Method::Fft => price_fft(model, market, req, &cfg.fft_config(model)?),
        Method::FftSa => price_fft_sa(model, market, req, &cfg.fft_config(model)?),
        Method::CmOpt => {
            let grid = FourierGrid::new(cfg.domain, cfg.n)?;
            let cm = CarrMadanConfig::new(cfg.resolved_alpha(model)?)?;
            price_carr_madan(model, market, req, &grid, &cm)
        }
        Method::Dpd => price_dpd(model, market, req, &FourierGrid::new(cfg.domain, cfg.n)?),
        Method::DpdOpt => price_dpd_vec(model, market, req, &FourierGrid::new(cfg.domain, cfg.n)?),
        Method::AtOpt => price_attari(model, market, req, &FourierGrid::new(cfg.domain, cfg.n)?),
    }
}
