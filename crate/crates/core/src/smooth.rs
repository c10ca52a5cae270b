//! Estimators of the expected-value trajectory from a single path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmootherConfig {
    HodrickPrescott { lambda: f64 },
    MovingAverage { window: usize },
    Exponential { period: usize },
}

impl SmootherConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SmootherConfig::HodrickPrescott { lambda } if !(lambda.is_finite() && lambda > 0.0) => {
                Err(Error::InvalidParameter(format!(
                    "HP lambda must be > 0, got {lambda}"
                )))
            }
            SmootherConfig::MovingAverage { window: 0 } => Err(Error::InvalidParameter(
                "moving-average window must be >= 1".into(),
            )),
            SmootherConfig::Exponential { period: 0 } => Err(Error::InvalidParameter(
                "smoothing period must be >= 1".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, series: &[f64]) -> Result<Vec<f64>> {
        match *self {
            SmootherConfig::HodrickPrescott { lambda } => hp_filter(series, lambda),
            SmootherConfig::MovingAverage { window } => moving_average(series, window),
            SmootherConfig::Exponential { period } => exponential_smoothing(series, period),
        }
    }

    pub fn min_len(&self) -> usize {
        match *self {
            SmootherConfig::HodrickPrescott { .. } => 4,
            SmootherConfig::MovingAverage { window } => window.max(1),
            SmootherConfig::Exponential { .. } => 1,
        }
    }
}

/// Symmetric positive-definite pentadiagonal system, stored by bands.
struct Pentadiagonal {
    diag: Vec<f64>,
    off1: Vec<f64>,
    off2: Vec<f64>,
}

impl Pentadiagonal {
    /// Solves `A x = rhs` through a banded LDLᵀ factorisation.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n.saturating_sub(1)];
        let mut l2 = vec![0.0; n.saturating_sub(2)];
        for i in 0..n {
            let mut di = self.diag[i];
            if i >= 1 {
                di -= l1[i - 1] * l1[i - 1] * d[i - 1];
            }
            if i >= 2 {
                di -= l2[i - 2] * l2[i - 2] * d[i - 2];
            }
            d[i] = di;
            if i + 1 < n {
                let mut e = self.off1[i];
                if i >= 1 {
                    e -= l2[i - 1] * l1[i - 1] * d[i - 1];
                }
                l1[i] = e / di;
            }
            if i + 2 < n {
                l2[i] = self.off2[i] / di;
            }
        }

        let mut x = rhs.to_vec();
        for i in 0..n {
            if i >= 1 {
                x[i] -= l1[i - 1] * x[i - 1];
            }
            if i >= 2 {
                x[i] -= l2[i - 2] * x[i - 2];
            }
        }
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                x[i] -= l1[i] * x[i + 1];
            }
            if i + 2 < n {
                x[i] -= l2[i] * x[i + 2];
            }
        }
        x
    }
}

/// Hodrick–Prescott trend: the minimiser of
/// `Σ(x_i − τ_i)² + λ Σ(τ_{i+1} − 2τ_i + τ_{i−1})²`, i.e. the solution of
/// `(I + λ DᵀD) τ = x` with `D` the second-difference operator. O(n).
pub fn hp_filter(series: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 4 {
        return Err(Error::SeriesTooShort {
            required: 4,
            actual: n,
        });
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "HP lambda must be > 0, got {lambda}"
        )));
    }
    let mut system = Pentadiagonal {
        diag: vec![1.0; n],
        off1: vec![0.0; n - 1],
        off2: vec![0.0; n - 2],
    };
    // Accumulate λ DᵀD one difference row (1, −2, 1) at a time.
    const ROW: [f64; 3] = [1.0, -2.0, 1.0];
    for r in 0..n - 2 {
        for a in 0..3 {
            system.diag[r + a] += lambda * ROW[a] * ROW[a];
            if a + 1 < 3 {
                system.off1[r + a] += lambda * ROW[a] * ROW[a + 1];
            }
        }
        system.off2[r] += lambda * ROW[0] * ROW[2];
    }
    Ok(system.solve(series))
}

/// Centred moving average; near the ends the window is truncated to the
/// samples that exist. Even windows put the extra sample on the left.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if window == 0 {
        return Err(Error::InvalidParameter("window must be >= 1".into()));
    }
    if window > n {
        return Err(Error::SeriesTooShort {
            required: window,
            actual: n,
        });
    }
    let left = window / 2;
    let right = (window - 1) / 2;
    Ok((0..n)
        .map(|i| {
            let span = &series[i.saturating_sub(left)..=(i + right).min(n - 1)];
            span.iter().sum::<f64>() / span.len() as f64
        })
        .collect())
}

/// Exponential smoothing with weight `β = 2 / (period + 1)`.
pub fn exponential_smoothing(series: &[f64], period: usize) -> Result<Vec<f64>> {
    if period == 0 {
        return Err(Error::InvalidParameter("period must be >= 1".into()));
    }
    let beta = 2.0 / (period as f64 + 1.0);
    let mut out = Vec::with_capacity(series.len());
    let mut prev = None;
    for &x in series {
        let s = match prev {
            None => x,
            Some(p) => beta * x + (1.0 - beta) * p,
        };
        out.push(s);
        prev = Some(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn second_diff_energy(x: &[f64]) -> f64 {
        x.windows(3)
            .map(|w| (w[0] - 2.0 * w[1] + w[2]).powi(2))
            .sum()
    }

    fn dense_hp(x: &[f64], lambda: f64) -> Vec<f64> {
        let n = x.len();
        let mut d = DMatrix::<f64>::zeros(n - 2, n);
        for r in 0..n - 2 {
            d[(r, r)] = 1.0;
            d[(r, r + 1)] = -2.0;
            d[(r, r + 2)] = 1.0;
        }
        let a = DMatrix::<f64>::identity(n, n) + lambda * d.transpose() * &d;
        a.lu()
            .solve(&DVector::from_column_slice(x))
            .unwrap()
            .iter()
            .copied()
            .collect()
    }

    fn random_series(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn hp_matches_dense_solve() {
        let x = random_series(200, 17);
        let fast = hp_filter(&x, 40000.0).unwrap();
        let dense = dense_hp(&x, 40000.0);
        let scale = dense.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).abs() / scale < 1e-10, "{a} vs {b}");
        }
        let x = random_series(4, 3);
        let fast = hp_filter(&x, 2.5).unwrap();
        for (a, b) in fast.iter().zip(dense_hp(&x, 2.5)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hp_preserves_affine_series() {
        let lin: Vec<f64> = (0..300).map(|i| 2.0 - 0.03 * i as f64).collect();
        for lambda in [1.0, 40000.0, 4e6] {
            let out = hp_filter(&lin, lambda).unwrap();
            let worst = out
                .iter()
                .zip(&lin)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            // Rounding grows with the condition number, which scales with λ.
            assert!(
                worst < 1e-12 + 1e-15 * lambda * 10.0,
                "lambda {lambda}: {worst:e}"
            );
        }
    }

    #[test]
    fn hp_lambda_limits() {
        let x: Vec<f64> = random_series(400, 5);
        let near_identity = hp_filter(&x, 1e-8).unwrap();
        let max_diff = near_identity
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-6);

        let n = x.len() as f64;
        let t: Vec<f64> = (0..x.len()).map(|i| i as f64).collect();
        let tm = t.iter().sum::<f64>() / n;
        let xm = x.iter().sum::<f64>() / n;
        let slope = t
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - tm) * (b - xm))
            .sum::<f64>()
            / t.iter().map(|a| (a - tm).powi(2)).sum::<f64>();
        let stiff = hp_filter(&x, 1e12).unwrap();
        for (i, v) in stiff.iter().enumerate() {
            let ols = xm + slope * (i as f64 - tm);
            assert!((v - ols).abs() < 1e-4, "i={i}: {v} vs {ols}");
        }
    }

    #[test]
    fn hp_rejects_short_input() {
        assert!(matches!(
            hp_filter(&[1.0, 2.0, 3.0], 10.0),
            Err(Error::SeriesTooShort {
                required: 4,
                actual: 3
            })
        ));
        assert!(hp_filter(&[1.0; 10], 0.0).is_err());
    }

    #[test]
    fn moving_average_examples() {
        assert_eq!(
            moving_average(&[1.0, 2.0, 3.0, 4.0, 5.0], 3).unwrap(),
            vec![1.5, 2.0, 3.0, 4.0, 4.5]
        );
        let x = random_series(50, 1);
        assert_eq!(moving_average(&x, 1).unwrap(), x);
        assert!(moving_average(&x, 51).is_err());
        // Even window: two samples to the left, one to the right.
        assert_eq!(
            moving_average(&[0.0, 4.0, 8.0, 12.0, 16.0], 4).unwrap(),
            vec![2.0, 4.0, 6.0, 10.0, 12.0]
        );
    }

    #[test]
    fn exponential_examples() {
        assert_eq!(
            exponential_smoothing(&[0.0, 1.0, 1.0, 1.0], 3).unwrap(),
            vec![0.0, 0.5, 0.75, 0.875]
        );
        let x = random_series(30, 2);
        assert_eq!(exponential_smoothing(&x, 1).unwrap(), x);
        assert!(exponential_smoothing(&x, 0).is_err());
    }

    #[test]
    fn all_smoothers_fix_constants() {
        let c = vec![3.25; 500];
        for cfg in [
            SmootherConfig::HodrickPrescott { lambda: 40000.0 },
            SmootherConfig::MovingAverage { window: 100 },
            SmootherConfig::Exponential { period: 1000 },
        ] {
            for v in cfg.apply(&c).unwrap() {
                assert!((v - 3.25).abs() < 1e-10, "{cfg:?}");
            }
        }
    }

    #[test]
    fn config_json_shape() {
        let cfg: SmootherConfig =
            serde_json::from_str(r#"{"kind":"hodrick_prescott","lambda":40000}"#).unwrap();
        assert_eq!(cfg, SmootherConfig::HodrickPrescott { lambda: 40000.0 });
        let bad = SmootherConfig::MovingAverage { window: 0 };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn hp_shrinks_curvature(seed in 0u64..1000, lambda in 0.1f64..1e6) {
            let x = random_series(120, seed);
            let out = hp_filter(&x, lambda).unwrap();
            prop_assert_eq!(out.len(), x.len());
            prop_assert!(second_diff_energy(&out) <= second_diff_energy(&x) * (1.0 + 1e-12));
        }
    }
}
