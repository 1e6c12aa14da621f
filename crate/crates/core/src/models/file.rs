use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AvgParams, BatesParams, BsmParams, MarketParams, ModelKind, ModelParams};
use crate::error::{PricingError, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelFile {
    model: ModelKind,
    params: serde_json::Value,
    market: MarketParams,
}

/// A model together with its market, as stored on disk:
/// `{"model": "bsm"|"bates"|"avg", "params": {...}, "market": {"s0": .., "r": ..}}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelFile {
    pub model: ModelParams,
    pub market: MarketParams,
}

#[derive(Serialize)]
struct RawModelFileOut<'a, P: Serialize> {
    model: ModelKind,
    params: &'a P,
    market: &'a MarketParams,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawModelFile = serde_json::from_str(text)?;
        let model = match raw.model {
            ModelKind::Bsm => ModelParams::Bsm(serde_json::from_value::<BsmParams>(raw.params)?),
            ModelKind::Bates => {
                ModelParams::Bates(serde_json::from_value::<BatesParams>(raw.params)?)
            }
            ModelKind::Avg => ModelParams::Avg(serde_json::from_value::<AvgParams>(raw.params)?),
        };
        model.validate()?;
        raw.market.validate()?;
        Ok(ModelFile {
            model,
            market: raw.market,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PricingError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let kind = self.model.kind();
        let out = match &self.model {
            ModelParams::Bsm(p) => serde_json::to_string_pretty(&RawModelFileOut {
                model: kind,
                params: p,
                market: &self.market,
            }),
            ModelParams::Bates(p) => serde_json::to_string_pretty(&RawModelFileOut {
                model: kind,
                params: p,
                market: &self.market,
            }),
            ModelParams::Avg(p) => serde_json::to_string_pretty(&RawModelFileOut {
                model: kind,
                params: p,
                market: &self.market,
            }),
        };
        out.expect("plain structs always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bsm() {
        let f = ModelFile::from_json(
            r#"{"model": "bsm", "params": {"sigma": 0.25}, "market": {"s0": 50, "r": 0.05}}"#,
        )
        .unwrap();
        assert_eq!(f.model, ModelParams::Bsm(BsmParams { sigma: 0.25 }));
        assert_eq!(f.market.s0, 50.0);
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(ModelFile::from_json(
            r#"{"model": "bsm", "params": {"sigma": 0.25, "vol": 1}, "market": {"s0": 50, "r": 0.05}}"#
        )
        .is_err());
        assert!(ModelFile::from_json(
            r#"{"model": "bsm", "params": {"sigma": 0.25}, "market": {"s0": 50, "r": 0.05}, "x": 1}"#
        )
        .is_err());
    }

    #[test]
    fn rejects_invalid_values() {
        let r = ModelFile::from_json(
            r#"{"model": "avg", "params": {"sigma": 1, "nu": -0.5, "theta": 2}, "market": {"s0": 100, "r": 0.02}}"#,
        );
        assert!(matches!(r, Err(PricingError::InvalidParams(_))));
    }

    #[test]
    fn round_trips() {
        let f = ModelFile {
            model: ModelParams::Avg(AvgParams {
                sigma: 0.12136,
                nu: 0.3,
                theta: -0.1436,
            }),
            market: MarketParams { s0: 100.0, r: 0.1 },
        };
        assert_eq!(ModelFile::from_json(&f.to_json()).unwrap(), f);
    }
}
