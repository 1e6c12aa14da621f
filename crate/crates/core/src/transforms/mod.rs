//! Trapezoidal quadrature on equidistant frequency grids and a radix-2 FFT.

mod fft;
mod grid;
mod phase;

pub use fft::{fft, fft_in_place, naive_dft, FftPlan};
pub use grid::{trapezoid, FourierGrid};
pub(crate) use phase::{phase_sum_pair, phase_sums};
