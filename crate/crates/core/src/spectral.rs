//! DFT analysis of a sampled trend and re-synthesis from its strongest
//! harmonics.
//!
//! Conventions: the forward transform is unnormalised,
//! `M_k = Σ_n x_n e^{−2πikn/N}`, and the inverse carries the `1/N`. The
//! one-sided amplitude of bin `j` is `|M_j|/N` for DC and Nyquist and
//! `2|M_j|/N` otherwise, which makes [`reconstruct`] the exact inverse of
//! [`amplitude_phase`] for real input.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trend::{normalize_phase, FourierTrend, Harmonic};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub coefficients: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Checks `M_{N−k} = conj(M_k)` relative to the largest coefficient.
    pub fn is_conjugate_symmetric(&self, rel_tol: f64) -> bool {
        let n = self.len();
        let scale = self
            .coefficients
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        (0..n).all(|k| {
            let mirror = self.coefficients[(n - k) % n];
            (self.coefficients[k] - mirror.conj()).norm() <= rel_tol * scale
        })
    }
}

/// Output of [`idft`]: the real part of the inverse and whether the input
/// spectrum was conjugate-symmetric (i.e. came from a real series).
#[derive(Debug, Clone, PartialEq)]
pub struct RealInverse {
    pub values: Vec<f64>,
    pub conjugate_symmetric: bool,
}

/// One line of a one-sided spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub bin: usize,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSpectrum {
    pub entries: Vec<SpectralLine>,
    pub n_samples: usize,
    pub sample_dt: f64,
}

impl HarmonicSpectrum {
    /// Physical frequency of `bin` for a trend of the given period.
    pub fn frequency(&self, bin: usize, period: f64) -> f64 {
        bin as f64 * period / (self.n_samples as f64 * self.sample_dt)
    }
}

/// Forward DFT, `M_k = Σ_n x_n e^{−2πikn/N}`.
pub fn dft(series: &[f64]) -> ComplexSpectrum {
    let mut buf: Vec<Complex64> = series.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    if !buf.is_empty() {
        FftPlanner::new()
            .plan_fft_forward(buf.len())
            .process(&mut buf);
    }
    ComplexSpectrum { coefficients: buf }
}

/// Inverse DFT with the `1/N` factor. A spectrum that is not
/// conjugate-symmetric still yields its real part, with the flag cleared.
pub fn idft(spectrum: &ComplexSpectrum) -> RealInverse {
    let n = spectrum.len();
    let conjugate_symmetric = spectrum.is_conjugate_symmetric(1e-9);
    if !conjugate_symmetric {
        log::warn!("idft: spectrum is not conjugate-symmetric; returning the real part");
    }
    let mut buf = spectrum.coefficients.clone();
    if n > 0 {
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    }
    let scale = 1.0 / n.max(1) as f64;
    RealInverse {
        values: buf.iter().map(|c| c.re * scale).collect(),
        conjugate_symmetric,
    }
}

/// One-sided amplitude/phase lines for bins `0..=L`, `L = ⌊N/2⌋`.
pub fn amplitude_phase(spectrum: &ComplexSpectrum, sample_dt: f64) -> HarmonicSpectrum {
    let n = spectrum.len();
    let last = n / 2;
    let entries = (0..=last)
        .filter(|_| n > 0)
        .map(|j| {
            let c = spectrum.coefficients[j];
            let edge = j == 0 || (n.is_multiple_of(2) && j == last);
            let scale = if edge { 1.0 } else { 2.0 } / n as f64;
            SpectralLine {
                bin: j,
                amplitude: c.norm() * scale,
                phase: normalize_phase(c.im.atan2(c.re)),
            }
        })
        .collect();
    HarmonicSpectrum {
        entries,
        n_samples: n,
        sample_dt,
    }
}

/// Keeps the `count` strongest lines (ties go to the lower bin), sorted by bin.
pub fn select_top(hs: &HarmonicSpectrum, count: usize) -> HarmonicSpectrum {
    let mut entries = hs.entries.clone();
    entries.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude).then(a.bin.cmp(&b.bin)));
    entries.truncate(count);
    entries.sort_by_key(|e| e.bin);
    HarmonicSpectrum {
        entries,
        n_samples: hs.n_samples,
        sample_dt: hs.sample_dt,
    }
}

/// `Σ a cos(2π·bin·n/N + φ)` for `n in 0..n_out`.
pub fn reconstruct(hs: &HarmonicSpectrum, n_out: usize) -> Vec<f64> {
    let big_n = hs.n_samples.max(1) as f64;
    (0..n_out)
        .map(|n| {
            hs.entries
                .iter()
                .map(|e| {
                    // Reduce bin·n mod N first so the angle stays small and exact.
                    let cycle = ((e.bin as u128 * n as u128) % hs.n_samples.max(1) as u128) as f64;
                    e.amplitude * (2.0 * PI * cycle / big_n + e.phase).cos()
                })
                .sum()
        })
        .collect()
}

/// Maps bins to trend harmonics, `k = bin·P/(N·dt)` for a trend of period `P`.
///
/// Every line must land on an integer `k`; otherwise the sampling window
/// does not hold a whole number of trend periods and the error names the
/// offending bin.
pub fn to_fourier_trend(hs: &HarmonicSpectrum, period: f64) -> Result<FourierTrend> {
    let harmonics = hs
        .entries
        .iter()
        .map(|e| {
            let freq = hs.frequency(e.bin, period);
            let k = freq.round();
            if !freq.is_finite() || (freq - k).abs() > 1e-9 * freq.abs().max(1.0) {
                return Err(Error::NonIntegerFrequency {
                    bin: e.bin,
                    frequency: freq,
                });
            }
            Harmonic::new(k as u32, e.amplitude, e.phase)
        })
        .collect::<Result<Vec<_>>>()?;
    FourierTrend::new(harmonics)?.with_period(period)
}
