//! Ensemble summaries and mean-square error metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MODE_BINS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    /// Midpoint of the fullest bin of a 100-bin histogram over [min, max].
    pub mode: f64,
    /// Sample standard deviation (n − 1 denominator; 0 for a single value).
    pub std: f64,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let std = if n > 1 {
        (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };

    let (lo, hi) = (sorted[0], sorted[n - 1]);
    let mode = if hi > lo {
        let width = (hi - lo) / MODE_BINS as f64;
        let mut counts = [0usize; MODE_BINS];
        for &v in &sorted {
            let b = (((v - lo) / width) as usize).min(MODE_BINS - 1);
            counts[b] += 1;
        }
        // max_by_key keeps the last maximum; scan in reverse to prefer the lower bin.
        let best = (0..MODE_BINS).rev().max_by_key(|&b| counts[b]).unwrap_or(0);
        lo + (best as f64 + 0.5) * width
    } else {
        lo
    };

    Ok(Summary {
        mean,
        median,
        mode,
        std,
    })
}

/// Mean squared difference `Σ(a_i − b_i)² / n`.
///
/// Named after the tables it reproduces; it is not square-rooted.
pub fn rms(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Empty);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64)
}

/// For each L whose predecessor L − 1 is present, `rms(mean_{L−1}, mean_L)`.
pub fn successive_l_rms(
    reconstructions: &BTreeMap<usize, Vec<f64>>,
) -> Result<BTreeMap<usize, f64>> {
    if reconstructions.len() < 2 {
        return Err(Error::InvalidParameter(
            "need reconstructions for at least two consecutive L".into(),
        ));
    }
    let keys: Vec<usize> = reconstructions.keys().copied().collect();
    if let Some(w) = keys.windows(2).find(|w| w[1] != w[0] + 1) {
        return Err(Error::MissingL(w[0] + 1));
    }
    keys.windows(2)
        .map(|w| Ok((w[1], rms(&reconstructions[&w[0]], &reconstructions[&w[1]])?)))
        .collect()
}

/// Pointwise mean across equally long series.
pub fn ensemble_mean_series<S: AsRef<[f64]>>(paths: &[S]) -> Result<Vec<f64>> {
    let first = paths.first().ok_or(Error::Empty)?.as_ref();
    let n = first.len();
    let mut acc = vec![0.0; n];
    for p in paths {
        let p = p.as_ref();
        if p.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: p.len(),
            });
        }
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
    }
    let count = paths.len() as f64;
    Ok(acc.into_iter().map(|a| a / count).collect())
}
