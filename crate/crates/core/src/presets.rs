//! Parameter sets used throughout the benchmarks and tests.

use crate::models::{AvgParams, BatesParams, BsmParams, MarketParams, ModelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub model: ModelParams,
    pub market: MarketParams,
    pub strikes: Vec<f64>,
    pub tenors: Vec<f64>,
}

pub fn bsm() -> Scenario {
    Scenario {
        name: "bsm",
        model: ModelParams::Bsm(BsmParams { sigma: 0.25 }),
        market: MarketParams { s0: 50.0, r: 0.05 },
        strikes: vec![30.0, 50.0, 70.0],
        tenors: vec![1.0, 0.1],
    }
}

/// Duffie, Pan and Singleton's Bates calibration.
pub fn bates_params() -> BatesParams {
    BatesParams {
        v0: 0.008836,
        v_bar: 0.014,
        a: 3.99,
        eta: 0.27,
        rho: -0.79,
        lambda: 0.11,
        mu_j: -0.12,
        nu_j: 0.15,
    }
}

pub fn bates() -> Scenario {
    Scenario {
        name: "bates",
        model: ModelParams::Bates(bates_params()),
        market: MarketParams { s0: 100.0, r: 0.0319 },
        strikes: vec![60.0, 100.0, 140.0],
        tenors: vec![1.0, 0.1],
    }
}

/// Madan, Carr and Chang's Variance Gamma example.
pub fn avg_test1() -> Scenario {
    Scenario {
        name: "avg-test1",
        model: ModelParams::Avg(AvgParams {
            sigma: 0.12136,
            nu: 0.3,
            theta: -0.1436,
        }),
        market: MarketParams { s0: 100.0, r: 0.1 },
        strikes: vec![60.0, 101.0, 140.0],
        tenors: vec![1.0, 0.1],
    }
}

/// A Variance Gamma set that breaks the risk-neutral inequality.
pub fn avg_table3() -> Scenario {
    Scenario {
        name: "avg-invalid",
        model: ModelParams::Avg(AvgParams {
            sigma: 1.0,
            nu: 0.5,
            theta: 2.0,
        }),
        market: MarketParams { s0: 100.0, r: 0.02 },
        strikes: vec![60.0, 90.0, 140.0],
        tenors: vec![0.1, 1.0],
    }
}

/// Valid measure, but Carr-Madan dampening must stay below 1.
pub fn avg_test3() -> Scenario {
    Scenario {
        name: "avg-test3",
        model: ModelParams::Avg(AvgParams {
            sigma: 1.0,
            nu: 0.2,
            theta: 1.5,
        }),
        market: MarketParams { s0: 100.0, r: 0.02 },
        strikes: vec![60.0, 90.0, 140.0],
        tenors: vec![1.0, 0.1],
    }
}

pub fn all_scenarios() -> Vec<Scenario> {
    vec![bsm(), bates(), avg_test1(), avg_table3(), avg_test3()]
}

pub fn by_name(name: &str) -> Option<Scenario> {
    all_scenarios().into_iter().find(|s| s.name == name)
}
