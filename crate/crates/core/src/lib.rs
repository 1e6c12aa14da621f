//! Fourier-based European option pricing.
//!
//! Seven engines share one characteristic-function layer:
//!
//! * `DPD` / `DPD-OPT`: delta-probability decomposition, one strike at a time
//!   or with strike-vectorised characteristic-function reuse.
//! * `AT-OPT`: Attari's single-integral formula.
//! * `COS-OPT`: Fourier-cosine expansion, multi-strike.
//! * `CM-OPT`: the damped Carr-Madan integral evaluated directly.
//! * `FFT` / `FFT-SA`: Carr-Madan through a radix-2 FFT, with log-linear
//!   interpolation or strike-adjusted grids.
//!
//! Models are Black-Scholes-Merton, Bates (Heston + lognormal jumps) and the
//! asymmetric Variance Gamma. The [`bench`] module holds the convergence
//! searches, timing harness and blow-up diagnostics.

pub mod bench;
pub mod error;
pub mod models;
pub mod presets;
pub mod pricers;
pub mod reference;
pub mod report;
pub mod transforms;

#[cfg(test)]
mod properties;

pub use error::{PricingError, Result};
pub use num_complex::Complex64;
