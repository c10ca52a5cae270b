//! CSV readers and writers for every artifact the harness emits.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sde::SampledPath;
use crate::spectral::HarmonicSpectrum;
use crate::stats::Summary;
use crate::trend::Harmonic;

/// 17 significant digits, enough to round-trip any f64.
pub fn full_precision(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn write_rows<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

fn read_rows<R: Read, T: DeserializeOwned>(reader: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_rows(create(path)?, rows)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_rows(open(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct PathRow {
    t: String,
    x: String,
}

/// `t,x` with one row per sample at full precision.
pub fn write_path<W: Write>(writer: W, path: &SampledPath) -> Result<()> {
    let rows: Vec<PathRow> = path
        .times()
        .zip(&path.values)
        .map(|(t, &x)| PathRow {
            t: full_precision(t),
            x: full_precision(x),
        })
        .collect();
    write_rows(writer, &rows)
}

pub fn write_path_csv(file: &Path, path: &SampledPath) -> Result<()> {
    write_path(create(file)?, path)
}

#[derive(Debug, Deserialize)]
struct PathRecord {
    t: f64,
    x: f64,
}

/// Reads a `t,x` file; the grid must be uniform.
pub fn read_path<R: Read>(reader: R) -> Result<SampledPath> {
    let rows: Vec<PathRecord> = read_rows(reader)?;
    if rows.len() < 2 {
        return Err(Error::SeriesTooShort {
            required: 2,
            actual: rows.len(),
        });
    }
    let dt = rows[1].t - rows[0].t;
    let t0 = rows[0].t;
    for (i, r) in rows.iter().enumerate() {
        let expect = t0 + i as f64 * dt;
        if (r.t - expect).abs() > 1e-9 * expect.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "non-uniform time grid at row {i}: t = {}, expected {expect}",
                r.t
            )));
        }
    }
    SampledPath::new(dt, rows.into_iter().map(|r| r.x).collect())
}

pub fn read_path_csv(file: &Path) -> Result<SampledPath> {
    read_path(open(file)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub path_index: u64,
    pub alpha1: f64,
    pub sigma1: f64,
    pub alpha2: f64,
    pub sigma2: f64,
    /// Mean squared error of μ̂ against the true trend.
    pub rms_mu1: f64,
    /// Mean squared error of μ̂̂ against the true trend.
    pub rms_mu2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticRow {
    pub statistic: String,
    pub value: f64,
}

pub fn summary_rows(s: &Summary) -> Vec<StatisticRow> {
    [
        ("mean", s.mean),
        ("median", s.median),
        ("mode", s.mode),
        ("std", s.std),
    ]
    .into_iter()
    .map(|(name, value)| StatisticRow {
        statistic: name.into(),
        value,
    })
    .collect()
}

pub fn summary_from_rows(rows: &[StatisticRow]) -> Result<Summary> {
    let get = |name: &str| {
        rows.iter()
            .find(|r| r.statistic == name)
            .map(|r| r.value)
            .ok_or_else(|| Error::InvalidParameter(format!("summary is missing '{name}'")))
    };
    Ok(Summary {
        mean: get("mean")?,
        median: get("median")?,
        mode: get("mode")?,
        std: get("std")?,
    })
}

/// `k,a,phi`.
pub fn write_harmonics(file: &Path, harmonics: &[Harmonic]) -> Result<()> {
    write_csv(file, harmonics)
}

pub fn read_harmonics(file: &Path) -> Result<Vec<Harmonic>> {
    read_csv(file)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub bin: usize,
    pub k: f64,
    pub amplitude: f64,
    pub phase: f64,
}

/// `bin,k,amplitude,phase`, with `k` the physical frequency for `period`.
pub fn write_spectrum(file: &Path, hs: &HarmonicSpectrum, period: f64) -> Result<()> {
    let rows: Vec<SpectrumRow> = hs
        .entries
        .iter()
        .map(|e| SpectrumRow {
            bin: e.bin,
            k: hs.frequency(e.bin, period),
            amplitude: e.amplitude,
            phase: e.phase,
        })
        .collect();
    write_csv(file, &rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub t: f64,
    pub mu: f64,
    pub mu_hat_mean: f64,
    pub mu_hat2_mean: f64,
}

/// `metric,ms,rms`: the mean square and its root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub ms: f64,
    pub rms: f64,
}

impl MetricRow {
    pub fn new(metric: &str, ms: f64) -> Self {
        Self {
            metric: metric.into(),
            ms,
            rms: ms.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessiveRow {
    #[serde(rename = "L")]
    pub l: usize,
    pub ms: f64,
    pub rms: f64,
}

/// Table-4 layout: per rank position (harmonics sorted by k), a statistic
/// over the ensemble for k, amplitude and phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSummaryRow {
    pub position: usize,
    pub statistic: String,
    pub k: f64,
    pub a: f64,
    pub phi: f64,
}
