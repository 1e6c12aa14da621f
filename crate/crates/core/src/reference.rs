//! Ground truth: the Black-Scholes formula and the two-engine oracle.

use std::collections::HashMap;
use std::fmt;
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PricingError, Result};
use crate::models::{MarketParams, ModelFile, ModelKind, ModelParams};
use crate::pricers::{
    price_attari, price_carr_madan, price_dpd_vec, CarrMadanConfig, PricingRequest,
};
use crate::transforms::FourierGrid;

/// Largest gap tolerated between the two engines of the dual oracle.
pub const AGREEMENT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    ClosedForm,
    DualMethod,
}

impl fmt::Display for ReferenceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceSource::ClosedForm => "closed_form",
            ReferenceSource::DualMethod => "dual_method",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceQuote {
    pub value: f64,
    pub source: ReferenceSource,
    /// Absolute gap between the two engines; zero for closed forms.
    pub agreement: f64,
}

/// Standard normal distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Black-Scholes call.
pub fn bsm_closed_form(market: &MarketParams, sigma: f64, k: f64, t: f64) -> ReferenceQuote {
    let sd = sigma * t.sqrt();
    let d1 = ((market.s0 / k).ln() + (market.r + 0.5 * sigma * sigma) * t) / sd;
    let d2 = d1 - sd;
    let value = market.s0 * norm_cdf(d1) - k * market.discount(t) * norm_cdf(d2);
    ReferenceQuote {
        value,
        source: ReferenceSource::ClosedForm,
        agreement: 0.0,
    }
}

/// The engine paired with Attari in the dual oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Partner {
    CarrMadan { alpha: f64 },
    DpdOpt,
}

/// Attari and the partner engine on the same grid; their mean if they agree
/// to [`AGREEMENT_TOLERANCE`], otherwise `AgreementFailure`.
pub fn dual_method_reference(
    model: &ModelParams,
    market: &MarketParams,
    k: f64,
    t: f64,
    domain: f64,
    n: usize,
    partner: Partner,
) -> Result<ReferenceQuote> {
    dual_method_references(model, market, &[k], t, domain, n, partner)?
        .pop()
        .expect("one strike in, one quote out")
}

/// Several strikes sharing one pair of engine runs. The outer error covers
/// failures to run at all; the inner one is the per-strike agreement gate.
pub fn dual_method_references(
    model: &ModelParams,
    market: &MarketParams,
    strikes: &[f64],
    t: f64,
    domain: f64,
    n: usize,
    partner: Partner,
) -> Result<Vec<Result<ReferenceQuote>>> {
    let req = PricingRequest::new(t, strikes.to_vec())?;
    let grid = FourierGrid::new(domain, n)?;
    let first = price_attari(model, market, &req, &grid)?;
    let second = match partner {
        Partner::CarrMadan { alpha } => {
            price_carr_madan(model, market, &req, &grid, &CarrMadanConfig::new(alpha)?)?
        }
        Partner::DpdOpt => price_dpd_vec(model, market, &req, &grid)?,
    };
    Ok(first
        .values
        .iter()
        .zip(&second.values)
        .map(|(&a, &b)| {
            let gap = (a - b).abs();
            if gap < AGREEMENT_TOLERANCE {
                Ok(ReferenceQuote {
                    value: 0.5 * (a + b),
                    source: ReferenceSource::DualMethod,
                    agreement: gap,
                })
            } else {
                Err(PricingError::AgreementFailure {
                    first: a,
                    second: b,
                    gap,
                })
            }
        })
        .collect())
}

/// Short, stable hash of a model and its market.
pub fn params_hash(model: &ModelParams, market: &MarketParams) -> String {
    let json = ModelFile {
        model: *model,
        market: *market,
    }
    .to_json();
    let digest = Sha256::digest(json.as_bytes());
    hex::encode(&digest[..8])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CacheRow {
    model: ModelKind,
    params_hash: String,
    k: f64,
    t: f64,
    value: f64,
    agreement: f64,
    source: ReferenceSource,
}

type CacheKey = (ModelKind, String, u64, u64);

/// Append-only CSV store of reference quotes keyed by model, parameter hash,
/// strike and maturity.
#[derive(Debug)]
pub struct ReferenceCache {
    path: PathBuf,
    rows: HashMap<CacheKey, ReferenceQuote>,
}

impl ReferenceCache {
    pub const FILE_NAME: &'static str = "references.csv";

    /// Opens (or starts) the cache file at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut rows = HashMap::new();
        if path.exists() {
            let mut reader = csv::Reader::from_path(&path)?;
            for row in reader.deserialize::<CacheRow>() {
                let row = row?;
                rows.insert(
                    (row.model, row.params_hash, row.k.to_bits(), row.t.to_bits()),
                    ReferenceQuote {
                        value: row.value,
                        source: row.source,
                        agreement: row.agreement,
                    },
                );
            }
        }
        Ok(ReferenceCache { path, rows })
    }

    /// The cache under `$FP_CACHE_DIR`, if that variable is set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os("FP_CACHE_DIR") {
            Some(dir) => {
                std::fs::create_dir_all(&dir)?;
                Ok(Some(Self::open(Path::new(&dir).join(Self::FILE_NAME))?))
            }
            None => Ok(None),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, model: &ModelParams, market: &MarketParams, k: f64, t: f64) -> Option<ReferenceQuote> {
        let key = (model.kind(), params_hash(model, market), k.to_bits(), t.to_bits());
        self.rows.get(&key).copied()
    }

    pub fn insert(
        &mut self,
        model: &ModelParams,
        market: &MarketParams,
        k: f64,
        t: f64,
        quote: ReferenceQuote,
    ) -> Result<()> {
        let hash = params_hash(model, market);
        let key = (model.kind(), hash.clone(), k.to_bits(), t.to_bits());
        if self.rows.contains_key(&key) {
            return Ok(());
        }
        let fresh = !self.path.exists() || std::fs::metadata(&self.path)?.len() == 0;
        let file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
        writer.serialize(CacheRow {
            model: model.kind(),
            params_hash: hash,
            k,
            t,
            value: quote.value,
            agreement: quote.agreement,
            source: quote.source,
        })?;
        writer.flush()?;
        self.rows.insert(key, quote);
        Ok(())
    }

    /// Cached quote, or compute and store it.
    pub fn get_or_insert_with(
        &mut self,
        model: &ModelParams,
        market: &MarketParams,
        k: f64,
        t: f64,
        compute: impl FnOnce() -> Result<ReferenceQuote>,
    ) -> Result<ReferenceQuote> {
        if let Some(q) = self.get(model, market, k, t) {
            return Ok(q);
        }
        let q = compute()?;
        self.insert(model, market, k, t, q)?;
        Ok(q)
    }
}
