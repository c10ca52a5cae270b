//! Finite-difference derivatives of a uniformly sampled series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivRule {
    ThreePoint,
    FivePoint,
}

impl DerivRule {
    pub fn min_len(self) -> usize {
        match self {
            DerivRule::ThreePoint => 3,
            DerivRule::FivePoint => 5,
        }
    }
}

/// Full-length derivative: central stencils in the interior, one-sided
/// stencils of the same order at the ends.
pub fn differentiate(series: &[f64], dt: f64, rule: DerivRule) -> Result<Vec<f64>> {
    let n = series.len();
    if n < rule.min_len() {
        return Err(Error::SeriesTooShort {
            required: rule.min_len(),
            actual: n,
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let f = series;
    let mut out = vec![0.0; n];
    match rule {
        DerivRule::ThreePoint => {
            let h2 = 2.0 * dt;
            out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / h2;
            for i in 1..n - 1 {
                out[i] = (f[i + 1] - f[i - 1]) / h2;
            }
            out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / h2;
        }
        DerivRule::FivePoint => {
            let h12 = 12.0 * dt;
            out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / h12;
            out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / h12;
            for i in 2..n - 2 {
                out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / h12;
            }
            let m = n - 1;
            out[m - 1] =
                (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) / h12;
            out[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3]
                + 3.0 * f[m - 4])
                / h12;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sampled(n: usize, dt: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|i| f(i as f64 * dt)).collect()
    }

    fn max_err(rule: DerivRule, dt: f64, interior_only: bool) -> f64 {
        let n = (3.0 / dt) as usize;
        let f = sampled(n, dt, f64::sin);
        let d = differentiate(&f, dt, rule).unwrap();
        let skip = if interior_only { rule.min_len() / 2 } else { 0 };
        (skip..n - skip)
            .map(|i| (d[i] - (i as f64 * dt).cos()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn constants_have_zero_derivative() {
        for rule in [DerivRule::ThreePoint, DerivRule::FivePoint] {
            let d = differentiate(&[2.0; 9], 0.1, rule).unwrap();
            assert!(d.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn quadratics_exact_for_three_point() {
        let dt = 0.1;
        let f = sampled(20, dt, |t| t * t);
        let d = differentiate(&f, dt, DerivRule::ThreePoint).unwrap();
        for (i, v) in d.iter().enumerate() {
            assert!((v - 2.0 * i as f64 * dt).abs() < 1e-10, "i={i}");
        }
    }

    #[test]
    fn quartics_exact_for_five_point() {
        let dt = 0.05;
        let f = sampled(30, dt, |t| t.powi(4) - t.powi(3));
        let d = differentiate(&f, dt, DerivRule::FivePoint).unwrap();
        for (i, v) in d.iter().enumerate() {
            let t = i as f64 * dt;
            assert!((v - (4.0 * t.powi(3) - 3.0 * t * t)).abs() < 1e-9, "i={i}");
        }
    }

    #[test]
    fn taylor_remainder_bound_on_sine() {
        let dt = 1.0 / 250.0;
        assert!(max_err(DerivRule::ThreePoint, dt, true) < dt * dt / 6.0 * 1.0001);
    }

    #[test]
    fn convergence_orders() {
        for (rule, order) in [(DerivRule::ThreePoint, 2.0), (DerivRule::FivePoint, 4.0)] {
            for interior in [true, false] {
                let (h1, h2) = (0.02, 0.01);
                let slope =
                    (max_err(rule, h1, interior) / max_err(rule, h2, interior)).ln() / 2f64.ln();
                assert!(
                    (slope - order).abs() < 0.2,
                    "{rule:?} interior={interior}: {slope}"
                );
            }
        }
    }

    #[test]
    fn too_short() {
        assert!(differentiate(&[1.0, 2.0], 0.1, DerivRule::ThreePoint).is_err());
        assert!(differentiate(&[1.0, 2.0, 3.0, 4.0], 0.1, DerivRule::FivePoint).is_err());
        assert!(differentiate(&[1.0, 2.0, 3.0], 0.0, DerivRule::ThreePoint).is_err());
    }

    proptest! {
        #[test]
        fn linear_in_input(
            f in prop::collection::vec(-10.0f64..10.0, 8),
            g in prop::collection::vec(-10.0f64..10.0, 8),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            for rule in [DerivRule::ThreePoint, DerivRule::FivePoint] {
                let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
                let lhs = differentiate(&combo, 0.1, rule).unwrap();
                let df = differentiate(&f, 0.1, rule).unwrap();
                let dg = differentiate(&g, 0.1, rule).unwrap();
                for i in 0..8 {
                    prop_assert!((lhs[i] - (a * df[i] + b * dg[i])).abs() < 1e-10);
                }
            }
        }
    }
}
