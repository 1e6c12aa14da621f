use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Equidistant grid on `[0, w_max]` with `n` intervals.
///
/// Nodes are `j * dw` for `j = 0..=n`. The engines only ever call the
/// characteristic function at the `n` positive nodes; the `w = 0` node
/// carries the analytic limit of each integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierGrid {
    pub w_max: f64,
    pub n: usize,
}

impl FourierGrid {
    pub fn new(w_max: f64, n: usize) -> Result<Self> {
        if !(w_max.is_finite() && w_max > 0.0) {
            return Err(PricingError::InvalidParams(format!(
                "grid upper limit must be > 0, got {w_max}"
            )));
        }
        if n < 2 {
            return Err(PricingError::InvalidParams(format!(
                "grid needs at least 2 intervals, got {n}"
            )));
        }
        Ok(FourierGrid { w_max, n })
    }

    pub fn step(&self) -> f64 {
        self.w_max / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.step()
    }

    /// The `n` positive nodes `dw, 2dw, ..., w_max`.
    pub fn positive_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let dw = self.step();
        (1..=self.n).map(move |j| j as f64 * dw)
    }

    pub fn weight(&self, j: usize) -> f64 {
        let dw = self.step();
        if j == 0 || j == self.n {
            0.5 * dw
        } else {
            dw
        }
    }
}

/// Trapezoid rule over every node of `grid`, including `w = 0`.
pub fn trapezoid(f: impl Fn(f64) -> f64, grid: &FourierGrid) -> Result<f64> {
    let mut sum = 0.0;
    for j in 0..=grid.n {
        let w = grid.node(j);
        let v = f(w);
        if !v.is_finite() {
            return Err(PricingError::NonFiniteIntegrand { w });
        }
        sum += grid.weight(j) * v;
    }
    Ok(sum)
}
