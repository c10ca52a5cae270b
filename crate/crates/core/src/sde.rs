//! Euler–Maruyama sample paths of `dX = α(μ(t) − X)dt + σ X^γ dB`.
//!
//! Gaussian increments come from a ChaCha8 stream keyed by
//! `(base_seed, path_index)`: the seed is expanded with `seed_from_u64` and
//! the path index selects the ChaCha stream. Each path therefore owns an
//! independent, counter-based stream and an ensemble does not depend on how
//! paths are scheduled across threads. Normals are drawn with the
//! `rand_distr` ziggurat sampler.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trend::FourierTrend;

/// Elasticity of the diffusion term, kept exact so `x^γ` is branch-exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gamma {
    Zero,
    Half,
    One,
}

impl Gamma {
    pub fn from_f64(value: f64) -> Result<Self> {
        if value == 0.0 {
            Ok(Gamma::Zero)
        } else if value == 0.5 {
            Ok(Gamma::Half)
        } else if value == 1.0 {
            Ok(Gamma::One)
        } else {
            Err(Error::InvalidParameter(format!(
                "gamma must be one of 0, 0.5, 1; got {value}"
            )))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Gamma::Zero => 0.0,
            Gamma::Half => 0.5,
            Gamma::One => 1.0,
        }
    }

    /// `x^γ`.
    #[inline]
    pub fn pow(self, x: f64) -> f64 {
        match self {
            Gamma::Zero => 1.0,
            Gamma::Half => x.sqrt(),
            Gamma::One => x,
        }
    }

    /// Whether the process must stay strictly positive.
    pub fn requires_positive(self) -> bool {
        !matches!(self, Gamma::Zero)
    }
}

impl Serialize for Gamma {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Gamma::from_f64(v).map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for Gamma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1/2" => Ok(Gamma::Half),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse gamma '{other}'")))
                .and_then(Gamma::from_f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSdeParams")]
pub struct SdeParams {
    pub alpha: f64,
    pub sigma: f64,
    pub gamma: Gamma,
}

#[derive(Deserialize)]
struct RawSdeParams {
    alpha: f64,
    sigma: f64,
    gamma: Gamma,
}

impl TryFrom<RawSdeParams> for SdeParams {
    type Error = Error;

    fn try_from(raw: RawSdeParams) -> Result<Self> {
        SdeParams::new(raw.alpha, raw.sigma, raw.gamma)
    }
}

impl SdeParams {
    pub fn new(alpha: f64, sigma: f64, gamma: Gamma) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 0, got {alpha}"
            )));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be >= 0, got {sigma}"
            )));
        }
        Ok(Self {
            alpha,
            sigma,
            gamma,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub path_index: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64, path_index: u64) -> Self {
        Self {
            base_seed,
            path_index,
        }
    }

    /// The Gaussian stream this seed selects.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(self.path_index);
        rng
    }
}

/// A uniformly sampled realisation `X_0, …, X_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub dt: f64,
    pub values: Vec<f64>,
    /// Steps that landed at or below zero and were reflected (γ ∈ {½, 1}).
    pub reflections: usize,
}

impl SampledPath {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        if values.len() < 2 {
            return Err(Error::SeriesTooShort {
                required: 2,
                actual: values.len(),
            });
        }
        Ok(Self {
            dt,
            values,
            reflections: 0,
        })
    }

    pub fn x0(&self) -> f64 {
        self.values[0]
    }

    /// Number of increments `T`.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.dt)
    }
}

fn check_inputs(params: &SdeParams, x0: f64, n_steps: usize, dt: f64) -> Result<()> {
    if n_steps < 1 {
        return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    if !x0.is_finite() {
        return Err(Error::InvalidParameter("x0 must be finite".into()));
    }
    if params.gamma.requires_positive() && x0 <= 0.0 {
        return Err(Error::Domain(format!(
            "x0 must be > 0 when gamma = {}, got {x0}",
            params.gamma.as_f64()
        )));
    }
    Ok(())
}

/// One Euler–Maruyama path with `n_steps` increments.
///
/// The trend is sampled at the left endpoint of each step. For γ ∈ {½, 1}
/// the diffusion uses `max(x, 0)^γ`, and a step that still lands at or
/// below zero is reflected to `|x|` and counted in `reflections`.
pub fn simulate_path(
    params: &SdeParams,
    trend: &FourierTrend,
    x0: f64,
    n_steps: usize,
    dt: f64,
    seed: SeedSpec,
) -> Result<SampledPath> {
    check_inputs(params, x0, n_steps, dt)?;
    let mut rng = seed.rng();
    let sqrt_dt = dt.sqrt();
    let positive = params.gamma.requires_positive();

    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(x0);
    let mut reflections = 0;
    let mut x = x0;
    for i in 0..n_steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        let drift = params.alpha * (trend.eval(i as f64 * dt) - x) * dt;
        let diffusion = params.sigma * params.gamma.pow(x.max(0.0)) * sqrt_dt * z;
        x += drift + diffusion;
        if positive && x <= 0.0 {
            x = x.abs();
            reflections += 1;
        }
        values.push(x);
    }
    Ok(SampledPath {
        dt,
        values,
        reflections,
    })
}

/// `n_paths` independent paths; path `j` uses `SeedSpec(base_seed, j)`.
///
/// Runs on the current rayon pool; the output is identical for any pool size.
pub fn simulate_ensemble(
    params: &SdeParams,
    trend: &FourierTrend,
    x0: f64,
    n_steps: usize,
    dt: f64,
    n_paths: usize,
    base_seed: u64,
) -> Result<Vec<SampledPath>> {
    if n_paths < 1 {
        return Err(Error::InvalidParameter("n_paths must be >= 1".into()));
    }
    check_inputs(params, x0, n_steps, dt)?;
    (0..n_paths as u64)
        .into_par_iter()
        .map(|j| simulate_path(params, trend, x0, n_steps, dt, SeedSpec::new(base_seed, j)))
        .collect()
}
