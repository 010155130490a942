//! Radix-2 fast Fourier transform.
//!
//! The forward transform is the unnormalized DFT
//!
//! ```text
//!   X[k] = sum_{n=0}^{L-1} x[n] * exp(-j 2 pi k n / L),    L a power of two
//! ```
//!
//! implemented as an iterative Cooley-Tukey butterfly over a bit-reversal
//! permutation. [`FftPlan`] precomputes the permutation and twiddle factors
//! for one length so the per-chirp and per-range-bin transforms of the
//! range-Doppler pipeline pay the trigonometry once. The inverse transform is
//! provided for round-trip testing via the conjugation identity
//!
//! ```text
//!   ifft(X) = conj(fft(conj(X))) / L
//! ```
//!
//! and the Hamming window used on both FFT axes of the pipeline is
//!
//! ```text
//!   w[n] = 0.54 - 0.46 cos(2 pi n / (L - 1)),   w = [1] for L = 1.
//! ```

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Errors from transform construction or application.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FftError {
    /// The radix-2 algorithm requires lengths 1, 2, 4, 8, ...
    #[error("FFT length {0} is not a power of two")]
    LengthNotPowerOfTwo(usize),
    /// A plan was applied to a buffer of a different length.
    #[error("FFT plan for length {expected} applied to buffer of length {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

/// Precomputed bit-reversal permutation and twiddle factors for one length.
pub struct FftPlan {
    len: usize,
    stages: u32,
    /// `rev[i]` = bit-reversed index of `i` within `stages` bits.
    rev: Vec<u32>,
    /// `twiddle[k] = exp(-j 2 pi k / len)` for `k < len / 2`.
    twiddle: Vec<Complex64>,
}

impl FftPlan {
    /// Builds a plan for transforms of length `len` (a power of two, >= 1).
    pub fn new(len: usize) -> Result<Self, FftError> {
        if len == 0 || !len.is_power_of_two() {
            return Err(FftError::LengthNotPowerOfTwo(len));
        }
        let stages = len.trailing_zeros();
        let mut rev = vec![0u32; len];
        for i in 0..len {
            rev[i] = (rev[i >> 1] >> 1) | (((i & 1) as u32) << (stages.max(1) - 1));
        }
        if stages == 0 {
            rev[0] = 0;
        }
        let twiddle = (0..len / 2)
            .map(|k| {
                let angle = -2.0 * PI * k as f64 / len as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        Ok(Self { len, stages, rev, twiddle })
    }

    /// Transform length this plan was built for.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True only for the degenerate length-1 plan.
    pub fn is_empty(&self) -> bool {
        self.len == 1
    }

    /// In-place forward DFT of `data`.
    pub fn forward(&self, data: &mut [Complex64]) -> Result<(), FftError> {
        if data.len() != self.len {
            return Err(FftError::LengthMismatch { expected: self.len, actual: data.len() });
        }
        // Bit-reversal permutation: swap each index with its reversal once.
        for i in 0..self.len {
            let j = self.rev[i] as usize;
            if i < j {
                data.swap(i, j);
            }
        }
        // Butterflies, doubling the sub-transform size each stage.
        for s in 1..=self.stages {
            let m = 1usize << s;
            let half = m >> 1;
            let stride = self.len / m;
            let mut start = 0;
            while start < self.len {
                for k in 0..half {
                    let w = self.twiddle[k * stride];
                    let t = w * data[start + k + half];
                    let u = data[start + k];
                    data[start + k] = u + t;
                    data[start + k + half] = u - t;
                }
                start += m;
            }
        }
        Ok(())
    }
}

/// Forward unnormalized DFT of `x`; length must be a power of two.
pub fn fft(x: &[Complex64]) -> Result<Vec<Complex64>, FftError> {
    let plan = FftPlan::new(x.len())?;
    let mut data = x.to_vec();
    plan.forward(&mut data)?;
    Ok(data)
}

/// Inverse DFT of `x` such that `ifft(fft(x)) == x` (up to rounding).
pub fn ifft(x: &[Complex64]) -> Result<Vec<Complex64>, FftError> {
    let mut data: Vec<Complex64> = x.iter().map(Complex64::conj).collect();
    let plan = FftPlan::new(data.len())?;
    plan.forward(&mut data)?;
    let scale = 1.0 / data.len() as f64;
    Ok(data.iter().map(|v| v.conj() * scale).collect())
}

/// Hamming window of length `len`.
pub fn hamming(len: usize) -> Vec<f64> {
    if len <= 1 {
        return vec![1.0; len];
    }
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos())
        .collect()
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
