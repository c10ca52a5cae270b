//! Two-phase Gaussian estimation of (α, σ) and the reversion level.
//!
//! Both phases maximise the Euler–Maruyama likelihood of the standardised
//! increments
//!
//! ```text
//! Y_i = (X_i − X_{i−1} − [α(ℓ_{i−1} − X_{i−1}) + s_{i−1}] Δ) / X_{i−1}^γ ,  Y_i ~ N(0, σ²Δ)
//! ```
//!
//! where phase 1 uses the smoothed expected value `ℓ = m̂` with slope
//! `s = ṁ̂`, and phase 2 uses the spectrally cleaned trend `ℓ = μ̂̂` with no
//! slope term. For known γ both maximisers are closed-form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::deriv::{differentiate, DerivRule};
use crate::error::{Error, Result};
use crate::sde::{Gamma, SampledPath};
use crate::smooth::SmootherConfig;
use crate::spectral::{self, HarmonicSpectrum};
use crate::trend::Harmonic;

#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Result {
    pub alpha_hat: f64,
    pub sigma_hat: f64,
    pub m_hat: Vec<f64>,
    pub m_dot_hat: Vec<f64>,
    pub mu_hat: Vec<f64>,
    /// Log-likelihood at the estimate; `+∞` when the fit is exact (σ̂ = 0).
    pub loglik: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phase2Result {
    pub alpha_hat2: f64,
    pub sigma_hat2: f64,
    pub mu_hat2: Vec<f64>,
    pub harmonics: HarmonicSpectrum,
    pub loglik: f64,
}

fn check_aligned(path: &SampledPath, series: &[f64]) -> Result<()> {
    if series.len() != path.values.len() {
        return Err(Error::LengthMismatch {
            expected: path.values.len(),
            actual: series.len(),
        });
    }
    Ok(())
}

/// `X_{i−1}^γ` for every increment, rejecting non-positive levels when γ > 0.
fn diffusion_scale(path: &SampledPath, gamma: Gamma) -> Result<Vec<f64>> {
    let head = &path.values[..path.values.len() - 1];
    if gamma.requires_positive() {
        if let Some((i, x)) = head.iter().enumerate().find(|(_, &x)| x <= 0.0) {
            return Err(Error::Domain(format!(
                "X[{i}] = {x} is not positive; gamma = {} needs a positive path",
                gamma.as_f64()
            )));
        }
    }
    Ok(head.iter().map(|&x| gamma.pow(x)).collect())
}

/// Closed-form (α̂, σ̂) for a reversion level `level` with optional slope
/// term. Sums run over all `T` increments using index `i − 1` throughout.
fn closed_form(
    path: &SampledPath,
    level: &[f64],
    slope: Option<&[f64]>,
    gamma: Gamma,
) -> Result<(f64, f64)> {
    check_aligned(path, level)?;
    if let Some(s) = slope {
        check_aligned(path, s)?;
    }
    let dt = path.dt;
    let x = &path.values;
    let w = diffusion_scale(path, gamma)?;
    let t = path.steps();

    let mut num = 0.0;
    let mut den = 0.0;
    let mut scale = 0.0;
    for i in 1..=t {
        let gap = level[i - 1] - x[i - 1];
        let slope_term = slope.map_or(0.0, |s| s[i - 1]) * dt;
        let wi = w[i - 1];
        num += (x[i] - x[i - 1] - slope_term) * gap / (wi * wi);
        den += (gap / wi).powi(2);
        scale += (x[i - 1] / wi).powi(2);
    }
    if !den.is_finite() || den <= 1e-24 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateRegressor(
            "the reversion level coincides with the path; alpha is not identified".into(),
        ));
    }
    let alpha = num / (den * dt);

    let ss: f64 = (1..=t)
        .map(|i| {
            let gap = level[i - 1] - x[i - 1];
            let slope_term = slope.map_or(0.0, |s| s[i - 1]);
            let y = (x[i] - x[i - 1] - (alpha * gap + slope_term) * dt) / w[i - 1];
            y * y
        })
        .sum();
    let sigma = (ss / (t as f64 * dt)).sqrt();
    Ok((alpha, sigma))
}

/// Phase-1 closed form given the smoothed expected value and its derivative.
pub fn phase1_closed_form(
    path: &SampledPath,
    m_hat: &[f64],
    m_dot_hat: &[f64],
    gamma: Gamma,
) -> Result<(f64, f64)> {
    closed_form(path, m_hat, Some(m_dot_hat), gamma)
}

/// Phase-2 closed form against a cleaned reversion level (no slope term).
pub fn phase2_closed_form(path: &SampledPath, mu_hat2: &[f64], gamma: Gamma) -> Result<(f64, f64)> {
    closed_form(path, mu_hat2, None, gamma)
}

/// `log L = −(T/2) log(2πσ²Δ) − (1/(2σ²Δ)) Σ Y_i²`.
///
/// With `slope = Some(ṁ)` the level is read as m (phase 1); with `None` it
/// is the trend μ itself (phase 2).
pub fn gaussian_loglik(
    path: &SampledPath,
    level: &[f64],
    slope: Option<&[f64]>,
    alpha: f64,
    sigma: f64,
    gamma: Gamma,
) -> Result<f64> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma must be > 0 for the likelihood, got {sigma}"
        )));
    }
    check_aligned(path, level)?;
    if let Some(s) = slope {
        check_aligned(path, s)?;
    }
    let dt = path.dt;
    let x = &path.values;
    let w = diffusion_scale(path, gamma)?;
    let t = path.steps();
    let var = sigma * sigma * dt;
    let ss: f64 = (1..=t)
        .map(|i| {
            let gap = level[i - 1] - x[i - 1];
            let slope_term = slope.map_or(0.0, |s| s[i - 1]);
            let y = (x[i] - x[i - 1] - (alpha * gap + slope_term) * dt) / w[i - 1];
            y * y
        })
        .sum();
    Ok(-(t as f64) / 2.0 * (2.0 * PI * var).ln() - ss / (2.0 * var))
}

fn loglik_or_exact(
    path: &SampledPath,
    level: &[f64],
    slope: Option<&[f64]>,
    alpha: f64,
    sigma: f64,
    gamma: Gamma,
) -> Result<f64> {
    if sigma > 0.0 {
        gaussian_loglik(path, level, slope, alpha, sigma, gamma)
    } else {
        Ok(f64::INFINITY)
    }
}

/// Phase 1 from an already computed expected-value trajectory.
///
/// A non-positive α̂ is returned with a warning (the path does not look
/// mean-reverting); α̂ = 0 leaves μ̂ undefined and is an error.
pub fn phase1_from_trajectory(
    path: &SampledPath,
    m_hat: Vec<f64>,
    m_dot_hat: Vec<f64>,
    gamma: Gamma,
) -> Result<Phase1Result> {
    let (alpha_hat, sigma_hat) = phase1_closed_form(path, &m_hat, &m_dot_hat, gamma)?;
    let mut warnings = Vec::new();
    if alpha_hat == 0.0 {
        return Err(Error::Domain(
            "alpha estimate is exactly zero; the trend mu = m + m'/alpha is undefined".into(),
        ));
    }
    if alpha_hat < 0.0 {
        warnings.push(format!("non-reverting estimate: alpha_hat = {alpha_hat}"));
    }
    let mu_hat = m_hat
        .iter()
        .zip(&m_dot_hat)
        .map(|(m, d)| m + d / alpha_hat)
        .collect();
    let loglik = loglik_or_exact(path, &m_hat, Some(&m_dot_hat), alpha_hat, sigma_hat, gamma)?;
    Ok(Phase1Result {
        alpha_hat,
        sigma_hat,
        m_hat,
        m_dot_hat,
        mu_hat,
        loglik,
        warnings,
    })
}

/// Phase 1: smooth, differentiate, estimate, and form `μ̂ = m̂ + ṁ̂/α̂`.
pub fn phase1(
    path: &SampledPath,
    smoother: &SmootherConfig,
    rule: DerivRule,
    gamma: Gamma,
) -> Result<Phase1Result> {
    smoother.validate()?;
    let m_hat = smoother.apply(&path.values)?;
    let m_dot_hat = differentiate(&m_hat, path.dt, rule)?;
    phase1_from_trajectory(path, m_hat, m_dot_hat, gamma)
}

/// One-sided spectrum of the first-phase trend over the sampling window
/// (the first `T` samples, so a window holding whole trend periods lines
/// up with the DFT bins).
pub fn trend_spectrum(path: &SampledPath, mu_hat: &[f64]) -> Result<HarmonicSpectrum> {
    check_aligned(path, mu_hat)?;
    let window = path.steps();
    if window < 2 {
        return Err(Error::SeriesTooShort {
            required: 3,
            actual: path.values.len(),
        });
    }
    Ok(spectral::amplitude_phase(
        &spectral::dft(&mu_hat[..window]),
        path.dt,
    ))
}

/// Phase 2 from a precomputed spectrum of μ̂ (lets callers sweep `l_sum`
/// without repeating the transform).
pub fn phase2_from_spectrum(
    path: &SampledPath,
    spectrum: &HarmonicSpectrum,
    l_sum: usize,
    gamma: Gamma,
) -> Result<Phase2Result> {
    if l_sum < 1 {
        return Err(Error::InvalidParameter("L_sum must be >= 1".into()));
    }
    let harmonics = spectral::select_top(spectrum, l_sum);
    let mu_hat2 = spectral::reconstruct(&harmonics, path.values.len());
    let (alpha_hat2, sigma_hat2) = phase2_closed_form(path, &mu_hat2, gamma)?;
    let loglik = loglik_or_exact(path, &mu_hat2, None, alpha_hat2, sigma_hat2, gamma)?;
    Ok(Phase2Result {
        alpha_hat2,
        sigma_hat2,
        mu_hat2,
        harmonics,
        loglik,
    })
}

/// Phase 2: keep the `l_sum` strongest DFT harmonics of μ̂, rebuild μ̂̂ on
/// the full grid, and re-estimate (α, σ) against it.
pub fn phase2(
    path: &SampledPath,
    phase1: &Phase1Result,
    l_sum: usize,
    gamma: Gamma,
) -> Result<Phase2Result> {
    let spectrum = trend_spectrum(path, &phase1.mu_hat)?;
    phase2_from_spectrum(path, &spectrum, l_sum, gamma)
}

/// Everything needed to calibrate one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationSettings {
    pub smoother: SmootherConfig,
    pub deriv_rule: DerivRule,
    pub gamma: Gamma,
    pub l_sum: usize,
    /// Trend period in time units; `None` means one period per sampling window.
    pub trend_period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n_samples: usize,
    pub spectral_window: usize,
    pub trend_period: f64,
    pub loglik1: Option<f64>,
    pub loglik2: Option<f64>,
    pub warnings: Vec<String>,
}

/// JSON-facing summary of a two-phase calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub alpha_hat: f64,
    pub sigma_hat: f64,
    pub alpha_hat2: f64,
    pub sigma_hat2: f64,
    pub harmonics: Vec<Harmonic>,
    pub diagnostics: Diagnostics,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Both phases on one path, packaged as a report.
pub fn estimate_path(
    path: &SampledPath,
    settings: &EstimationSettings,
) -> Result<EstimationReport> {
    let p1 = phase1(
        path,
        &settings.smoother,
        settings.deriv_rule,
        settings.gamma,
    )?;
    let p2 = phase2(path, &p1, settings.l_sum, settings.gamma)?;
    Ok(build_report(path, settings, &p1, &p2))
}

pub(crate) fn build_report(
    path: &SampledPath,
    settings: &EstimationSettings,
    p1: &Phase1Result,
    p2: &Phase2Result,
) -> EstimationReport {
    let window = path.steps();
    let period = settings.trend_period.unwrap_or(window as f64 * path.dt);
    let mut warnings = p1.warnings.clone();
    if p2.alpha_hat2 <= 0.0 {
        warnings.push(format!(
            "non-reverting re-estimate: alpha_hat2 = {}",
            p2.alpha_hat2
        ));
    }
    if path.reflections > 0 {
        warnings.push(format!(
            "{} positivity reflections in the path",
            path.reflections
        ));
    }
    let harmonics = match spectral::to_fourier_trend(&p2.harmonics, period) {
        Ok(trend) => trend.harmonics().to_vec(),
        Err(e) => {
            warnings.push(e.to_string());
            Vec::new()
        }
    };
    EstimationReport {
        alpha_hat: p1.alpha_hat,
        sigma_hat: p1.sigma_hat,
        alpha_hat2: p2.alpha_hat2,
        sigma_hat2: p2.sigma_hat2,
        harmonics,
        diagnostics: Diagnostics {
            n_samples: path.values.len(),
            spectral_window: window,
            trend_period: period,
            loglik1: finite(p1.loglik),
            loglik2: finite(p2.loglik),
            warnings,
        },
    }
}
