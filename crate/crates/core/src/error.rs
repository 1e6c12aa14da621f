use thiserror::Error;

/// Errors raised by the models, kernels, engines and harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PricingError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite result: {0}")]
    NonFiniteResult(String),

    /// The integrand produced NaN or infinity at the given frequency node.
    #[error("non-finite integrand at w = {w}")]
    NonFiniteIntegrand { w: f64 },

    #[error("FFT length {0} is not a power of two")]
    BadLength(usize),

    #[error("dampening alpha={alpha:?} is infeasible: alpha_max={alpha_max:?}")]
    AlphaInfeasible { alpha: f64, alpha_max: f64 },

    #[error("dual-method reference failed: {first} vs {second} (gap {gap:e})")]
    AgreementFailure { first: f64, second: f64, gap: f64 },

    #[error("no convergence to tolerance {tol:e} before reaching cap {cap}")]
    NoConvergence { tol: f64, cap: f64 },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl PricingError {
    /// True for the diagnostic outcomes that signal numerical failure
    /// rather than bad input.
    pub fn is_blow_up(&self) -> bool {
        matches!(
            self,
            PricingError::NonFiniteIntegrand { .. } | PricingError::NonFiniteResult(_)
        )
    }
}

impl From<std::io::Error> for PricingError {
    fn from(e: std::io::Error) -> Self {
        PricingError::Io(e.to_string())
    }
}

impl From<csv::Error> for PricingError {
    fn from(e: csv::Error) -> Self {
        PricingError::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for PricingError {
    fn from(e: serde_json::Error) -> Self {
        PricingError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PricingError>;
