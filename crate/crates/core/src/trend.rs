//! The periodic reversion level μ(t) and the closed-form expected value m(t).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wraps an angle into (−π, π].
pub fn normalize_phase(phase: f64) -> f64 {
    let mut p = phase.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    // rem_euclid maps −π to π already; guard the rounding edge.
    if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

/// One cosine term `a cos(2πk t / P + φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHarmonic")]
pub struct Harmonic {
    pub k: u32,
    pub a: f64,
    pub phi: f64,
}

#[derive(Deserialize)]
struct RawHarmonic {
    k: u32,
    a: f64,
    phi: f64,
}

impl TryFrom<RawHarmonic> for Harmonic {
    type Error = Error;

    fn try_from(raw: RawHarmonic) -> Result<Self> {
        Harmonic::new(raw.k, raw.a, raw.phi)
    }
}

impl Harmonic {
    /// Builds a harmonic with its phase wrapped into (−π, π].
    ///
    /// A `k = 0` term is a constant offset `a cos φ`, so its phase must be 0
    /// or π (a negative level); anything else is rejected.
    pub fn new(k: u32, a: f64, phi: f64) -> Result<Self> {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "harmonic k={k}: amplitude must be finite and >= 0, got {a}"
            )));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "harmonic k={k}: phase must be finite"
            )));
        }
        let mut phi = normalize_phase(phi);
        if k == 0 {
            if phi.abs() < 1e-9 {
                phi = 0.0;
            } else if (PI - phi.abs()) < 1e-9 {
                phi = PI;
            } else {
                return Err(Error::InvalidParameter(format!(
                    "constant harmonic must have phase 0 or pi, got {phi}"
                )));
            }
        }
        Ok(Self { k, a, phi })
    }
}

/// Truncated Fourier series `μ(t) = Σ a_k cos(2πk t / P + φ_k)`.
///
/// The period `P` defaults to one time unit. It is not part of the JSON
/// form (a bare array of `{k, a, phi}`); callers that sample the trend on a
/// different clock set it with [`FourierTrend::with_period`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Harmonic>", into = "Vec<Harmonic>")]
pub struct FourierTrend {
    harmonics: Vec<Harmonic>,
    period: f64,
}

impl TryFrom<Vec<Harmonic>> for FourierTrend {
    type Error = Error;

    fn try_from(harmonics: Vec<Harmonic>) -> Result<Self> {
        FourierTrend::new(harmonics)
    }
}

impl From<FourierTrend> for Vec<Harmonic> {
    fn from(trend: FourierTrend) -> Self {
        trend.harmonics
    }
}

impl FourierTrend {
    pub fn new(mut harmonics: Vec<Harmonic>) -> Result<Self> {
        harmonics.sort_by_key(|h| h.k);
        if let Some(w) = harmonics.windows(2).find(|w| w[0].k == w[1].k) {
            return Err(Error::InvalidParameter(format!(
                "duplicate harmonic index k={}",
                w[0].k
            )));
        }
        Ok(Self {
            harmonics,
            period: 1.0,
        })
    }

    /// Convenience constructor from `(k, a, phi)` triples.
    pub fn from_triples(triples: &[(u32, f64, f64)]) -> Result<Self> {
        let harmonics = triples
            .iter()
            .map(|&(k, a, phi)| Harmonic::new(k, a, phi))
            .collect::<Result<Vec<_>>>()?;
        Self::new(harmonics)
    }

    pub fn constant(level: f64) -> Result<Self> {
        let phi = if level < 0.0 { PI } else { 0.0 };
        Self::from_triples(&[(0, level.abs(), phi)])
    }

    pub fn with_period(mut self, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "trend period must be > 0, got {period}"
            )));
        }
        self.period = period;
        Ok(self)
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    fn angular(&self, k: u32) -> f64 {
        2.0 * PI * k as f64 / self.period
    }

    /// μ(t).
    pub fn eval(&self, t: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| h.a * (self.angular(h.k) * t + h.phi).cos())
            .sum()
    }

    /// μ sampled at `t = i·dt` for `i in 0..n`.
    pub fn sample(&self, n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| self.eval(i as f64 * dt)).collect()
    }
}

/// Free-function form of [`FourierTrend::eval`].
pub fn eval_trend(trend: &FourierTrend, t: f64) -> f64 {
    trend.eval(t)
}

/// Reversion rate and initial level for the expected-value ODE
/// `ṁ = α(μ(t) − m)`, `m(0) = m0`.
///
/// Existence and uniqueness of the SDE solution need `α > 0` (and `σ > 0`
/// on the process side); nothing stronger is required here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedValueParams {
    pub alpha: f64,
    pub m0: f64,
}

impl ExpectedValueParams {
    pub fn new(alpha: f64, m0: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 0, got {alpha}"
            )));
        }
        if !m0.is_finite() {
            return Err(Error::InvalidParameter("m0 must be finite".into()));
        }
        Ok(Self { alpha, m0 })
    }
}

/// Closed-form `m(t) = m0 e^{−αt} + α e^{−αt} f(t)`.
///
/// The `e^{αt}` inside `f` is folded into the outer `e^{−αt}` so long
/// horizons do not overflow. Exact at `t = 0`.
pub fn expected_value(trend: &FourierTrend, p: &ExpectedValueParams, t: f64) -> f64 {
    let alpha = p.alpha;
    let decay = (-alpha * t).exp();
    let forced: f64 = trend
        .harmonics()
        .iter()
        .map(|h| {
            let w = trend.angular(h.k);
            let now = alpha * (w * t + h.phi).cos() + w * (w * t + h.phi).sin();
            let start = alpha * h.phi.cos() + w * h.phi.sin();
            h.a * (now - decay * start) / (alpha * alpha + w * w)
        })
        .sum();
    p.m0 * decay + alpha * forced
}

/// `expected_value` on the grid `t = i·dt`, `i in 0..n`.
pub fn expected_value_path(
    trend: &FourierTrend,
    p: &ExpectedValueParams,
    n: usize,
    dt: f64,
) -> Vec<f64> {
    (0..n)
        .map(|i| expected_value(trend, p, i as f64 * dt))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::reference::base_trend;
    use proptest::prelude::*;

    #[test]
    fn constant_and_quarter_period() {
        let c = FourierTrend::from_triples(&[(0, 1.0, 0.0)]).unwrap();
        assert_eq!(c.eval(3.7), 1.0);
        let s = FourierTrend::from_triples(&[(1, 2.0, 0.0)]).unwrap();
        assert!(s.eval(0.25).abs() < 1e-15);
    }

    #[test]
    fn base_trend_at_origin_is_sum_of_cosines() {
        // Frozen from an independent mpmath sum of a_k cos(phi_k) over the ten base triples.
        let trend = base_trend();
        assert!((trend.eval(0.0) - 7.097_004_310_491_447).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_harmonics() {
        assert!(Harmonic::new(1, -0.1, 0.0).is_err());
        assert!(Harmonic::new(0, 1.0, 0.5).is_err());
        assert!(FourierTrend::from_triples(&[(2, 1.0, 0.0), (2, 0.5, 0.1)]).is_err());
        assert!(FourierTrend::constant(1.0)
            .unwrap()
            .with_period(0.0)
            .is_err());
    }

    #[test]
    fn phase_is_wrapped() {
        let h = Harmonic::new(3, 1.0, 3.0 * PI / 2.0).unwrap();
        assert!((h.phi + PI / 2.0).abs() < 1e-12);
        assert_eq!(normalize_phase(-PI), PI);
        assert_eq!(Harmonic::new(0, 2.0, -PI).unwrap().phi, PI);
    }

    #[test]
    fn json_shape() {
        let trend = FourierTrend::from_triples(&[(0, 1.5, 0.0), (3, 0.25, -1.0)]).unwrap();
        let text = serde_json::to_string(&trend).unwrap();
        assert_eq!(
            text,
            r#"[{"k":0,"a":1.5,"phi":0.0},{"k":3,"a":0.25,"phi":-1.0}]"#
        );
        let back: FourierTrend = serde_json::from_str(&text).unwrap();
        assert_eq!(back, trend);
        assert!(serde_json::from_str::<FourierTrend>(r#"[{"k":1,"a":-1,"phi":0}]"#).is_err());
    }

    #[test]
    fn expected_value_steady_state_and_origin() {
        let c = FourierTrend::constant(4.2).unwrap();
        let p = ExpectedValueParams::new(3.0, 4.2).unwrap();
        for t in [0.0, 0.1, 1.0, 50.0] {
            assert!((expected_value(&c, &p, t) - 4.2).abs() < 1e-12);
        }
        let trend = base_trend();
        let p = ExpectedValueParams::new(20.0, -3.0).unwrap();
        assert_eq!(expected_value(&trend, &p, 0.0), -3.0);
        assert!(ExpectedValueParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn expected_value_survives_long_horizons() {
        let trend = base_trend();
        let p = ExpectedValueParams::new(20.0, trend.eval(0.0)).unwrap();
        let v = expected_value(&trend, &p, 400.0);
        assert!(v.is_finite());
    }

    /// Classic RK4 on ṁ = α(μ(t) − m); the oracle for the closed form.
    fn rk4_expected(
        trend: &FourierTrend,
        alpha: f64,
        m0: f64,
        t_end: f64,
        h: f64,
    ) -> Vec<(f64, f64)> {
        let f = |t: f64, m: f64| alpha * (trend.eval(t) - m);
        let steps = (t_end / h).round() as usize;
        let mut out = Vec::with_capacity(steps / 1000 + 2);
        let mut m = m0;
        for i in 0..steps {
            let t = i as f64 * h;
            if i % 1000 == 0 {
                out.push((t, m));
            }
            let k1 = f(t, m);
            let k2 = f(t + h / 2.0, m + h / 2.0 * k1);
            let k3 = f(t + h / 2.0, m + h / 2.0 * k2);
            let k4 = f(t + h, m + h * k3);
            m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.push((steps as f64 * h, m));
        out
    }

    #[test]
    fn closed_form_matches_ode_integration() {
        let trend = base_trend();
        let alpha = 20.0;
        let p = ExpectedValueParams::new(alpha, trend.eval(0.0)).unwrap();
        for (t, m) in rk4_expected(&trend, alpha, p.m0, 16.0, 2e-5) {
            let cf = expected_value(&trend, &p, t);
            assert!(((cf - m) / m).abs() < 1e-8, "t={t}: {cf} vs {m}");
        }
    }

    #[test]
    fn path_matches_pointwise() {
        let trend = base_trend();
        let p = ExpectedValueParams::new(20.0, trend.eval(0.0)).unwrap();
        let dt = 1.0 / 250.0;
        let path = expected_value_path(&trend, &p, 4000, dt);
        assert_eq!(path.len(), 4000);
        for (i, v) in path.iter().enumerate() {
            assert_eq!(*v, expected_value(&trend, &p, i as f64 * dt));
        }
        assert_eq!(expected_value_path(&trend, &p, 1, dt), vec![p.m0]);
        let c = FourierTrend::constant(2.5).unwrap();
        let pc = ExpectedValueParams::new(5.0, 2.5).unwrap();
        assert!(expected_value_path(&c, &pc, 5, 0.1)
            .iter()
            .all(|v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn ode_residual_is_second_order() {
        let trend = base_trend();
        let alpha = 20.0;
        let p = ExpectedValueParams::new(alpha, 6.0).unwrap();
        let t = 0.37;
        let resid = |h: f64| {
            let d =
                (expected_value(&trend, &p, t + h) - expected_value(&trend, &p, t - h)) / (2.0 * h);
            (d - alpha * (trend.eval(t) - expected_value(&trend, &p, t))).abs()
        };
        let (h1, h2) = (1e-2, 5e-3);
        let slope = (resid(h1) / resid(h2)).ln() / (h1 / h2).ln();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn oscillation_mean_relaxes_toward_offset() {
        let trend = FourierTrend::from_triples(&[(0, 5.0, 0.0), (3, 0.5, 0.4)]).unwrap();
        let p = ExpectedValueParams::new(1.5, 2.0).unwrap();
        let mean_over = |a: f64| {
            let n = 2000;
            (0..n)
                .map(|i| expected_value(&trend, &p, a + i as f64 / n as f64))
                .sum::<f64>()
                / n as f64
        };
        assert!((mean_over(15.0) - 5.0).abs() < (mean_over(0.0) - 5.0).abs());
    }

    #[test]
    fn period_scales_time() {
        let base = base_trend();
        let stretched = base.clone().with_period(16.0).unwrap();
        for t in [0.0, 0.3, 1.7, 9.1] {
            assert!((stretched.eval(16.0 * t) - base.eval(t)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn integer_trend_is_one_periodic(t in -100.0f64..100.0) {
            let trend = base_trend();
            prop_assert!((trend.eval(t) - trend.eval(t + 1.0)).abs() < 1e-12);
        }
    }
}
