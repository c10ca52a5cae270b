//! Simulation and calibration of one-factor mean-reversion processes whose
//! reversion level is a periodic Fourier series,
//!
//! ```text
//! dX_t = α (μ(t) − X_t) dt + σ X_t^γ dB_t,   μ(t) = Σ a_k cos(2πk t / P + φ_k)
//! ```
//!
//! Calibration runs in two phases. Phase 1 smooths the observed path into an
//! estimate of the expected value m(t), differentiates it, and recovers
//! (α, σ) in closed form from the Euler–Maruyama likelihood; the trend
//! follows from μ = m + ṁ/α. Phase 2 projects that trend estimate onto its
//! strongest DFT harmonics and re-estimates (α, σ) against the cleaned trend.

pub mod deriv;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod sde;
pub mod smooth;
pub mod spectral;
pub mod stats;
pub mod trend;

pub use deriv::{differentiate, DerivRule};
pub use error::{Error, Result};
pub use estimate::{
    gaussian_loglik, phase1, phase1_closed_form, phase2, EstimationReport, Phase1Result,
    Phase2Result,
};
pub use sde::{simulate_ensemble, simulate_path, Gamma, SampledPath, SdeParams, SeedSpec};
pub use smooth::{exponential_smoothing, hp_filter, moving_average, SmootherConfig};
pub use spectral::{ComplexSpectrum, HarmonicSpectrum, SpectralLine};
pub use stats::{ensemble_mean_series, rms, successive_l_rms, summarize, Summary};
pub use trend::{ExpectedValueParams, FourierTrend, Harmonic};
