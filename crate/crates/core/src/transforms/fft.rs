use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{PricingError, Result};

/// Precomputed bit-reversal permutation and twiddle factors for one length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    twiddles: Vec<Complex64>,
    reversed: Vec<usize>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(PricingError::BadLength(n));
        }
        let bits = n.trailing_zeros();
        let reversed = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..n / 2)
            .map(|k| {
                let (s, c) = (-2.0 * PI * k as f64 / n as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        Ok(FftPlan {
            n,
            twiddles,
            reversed,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `y[m] = sum_j exp(-2 pi i j m / n) x[j]`, in place.
    pub fn process(&self, x: &mut [Complex64]) -> Result<()> {
        if x.len() != self.n {
            return Err(PricingError::BadLength(x.len()));
        }
        for (i, &j) in self.reversed.iter().enumerate() {
            if i < j {
                x.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= self.n {
            let half = len / 2;
            let stride = self.n / len;
            for block in x.chunks_exact_mut(len) {
                let (lo, hi) = block.split_at_mut(half);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let t = self.twiddles[k * stride] * *b;
                    *b = *a - t;
                    *a += t;
                }
            }
            len <<= 1;
        }
        Ok(())
    }
}

pub fn fft_in_place(x: &mut [Complex64]) -> Result<()> {
    FftPlan::new(x.len())?.process(x)
}

pub fn fft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = x.to_vec();
    fft_in_place(&mut out)?;
    Ok(out)
}

/// O(N^2) reference transform with the same sign convention.
pub fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|m| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| {
                    // reduce j*m mod n before scaling to keep the angle exact
                    let (s, c) = (-2.0 * PI * ((j * m) % n) as f64 / n as f64).sin_cos();
                    v * Complex64::new(c, s)
                })
                .sum()
        })
        .collect()
}
