//! Monte Carlo runs: simulate, calibrate every path, aggregate, write artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{phase1, phase2_from_spectrum, trend_spectrum};
use crate::harness::config::ExperimentConfig;
use crate::harness::io::{
    self, EstimateRow, HarmonicSummaryRow, MetricRow, PlotRow, SuccessiveRow,
};
use crate::sde::{simulate_path, SeedSpec};
use crate::spectral::{reconstruct, select_top};
use crate::stats::{rms, successive_l_rms, summarize, Summary};
use crate::trend::Harmonic;

/// Paths processed per parallel batch; bounds memory for the per-path series.
const CHUNK: usize = 64;

/// Stream offset for the generator that picks the RMS 1 path, kept apart
/// from the path streams `0..n_paths`.
const PICK_STREAM: u64 = u64::MAX;

struct PathResult {
    row: EstimateRow,
    mu_hat: Vec<f64>,
    mu_hat2: Vec<f64>,
    /// `(bin, frequency, amplitude, phase)` per retained line, sorted by bin.
    lines: Vec<(usize, f64, f64, f64)>,
    sweep: Vec<Vec<f64>>,
    reflections: usize,
    warnings: usize,
}

/// Ensemble statistics for one rank position of the sorted harmonics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionSummary {
    pub position: usize,
    pub k: Summary,
    pub a: Summary,
    pub phi: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub n_paths: usize,
    pub n_samples: usize,
    pub spectral_window: usize,
    pub trend_period: f64,
    pub rms1_path_index: usize,
    pub modal_bins: Vec<usize>,
    pub modal_count: usize,
    /// Paths whose retained bin set differs from the modal set (pooled anyway).
    pub bin_set_mismatches: usize,
    pub reflections: usize,
    pub paths_with_warnings: usize,
}

/// Everything a run computes, before anything touches the filesystem.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub estimates: Vec<EstimateRow>,
    pub alpha1: Summary,
    pub alpha2: Summary,
    pub sigma1: Summary,
    pub sigma2: Summary,
    pub positions: Vec<PositionSummary>,
    /// Modal bins mapped to harmonics with the pooled median amplitude and phase.
    pub modal_harmonics: Vec<Harmonic>,
    /// Mean square of μ̂ and μ̂̂ against μ on one randomly chosen path.
    pub ms1: (f64, f64),
    /// Mean square of the ensemble-mean μ̂ and μ̂̂ against μ.
    pub ms2: (f64, f64),
    pub successive: BTreeMap<usize, f64>,
    pub times: Vec<f64>,
    pub mu: Vec<f64>,
    pub mean_mu_hat: Vec<f64>,
    pub mean_mu_hat2: Vec<f64>,
    pub diagnostics: RunDiagnostics,
}

pub struct RunArtifacts {
    pub outcome: RunOutcome,
    pub files: Vec<PathBuf>,
}

fn sweep_range(cfg: &ExperimentConfig) -> Vec<usize> {
    cfg.l_sweep
        .map_or_else(Vec::new, |[lo, hi]| (lo..=hi).collect())
}

fn run_path(cfg: &ExperimentConfig, mu: &[f64], index: usize) -> Result<PathResult> {
    let trend = cfg.timed_trend()?;
    let gamma = cfg.sde.gamma;
    let path = simulate_path(
        &cfg.sde,
        &trend,
        cfg.x0()?,
        cfg.n_steps,
        cfg.dt,
        SeedSpec::new(cfg.base_seed, index as u64),
    )?;
    let p1 = phase1(&path, &cfg.smoother, cfg.deriv_rule, gamma)?;
    let spectrum = trend_spectrum(&path, &p1.mu_hat)?;
    let p2 = phase2_from_spectrum(&path, &spectrum, cfg.l_sum, gamma)?;
    let period = cfg.period();
    let lines = p2
        .harmonics
        .entries
        .iter()
        .map(|e| {
            (
                e.bin,
                p2.harmonics.frequency(e.bin, period),
                e.amplitude,
                e.phase,
            )
        })
        .collect();
    let n = path.values.len();
    let sweep = sweep_range(cfg)
        .into_iter()
        .map(|l| reconstruct(&select_top(&spectrum, l), n))
        .collect();
    let warnings = usize::from(!p1.warnings.is_empty() || p2.alpha_hat2 <= 0.0);
    Ok(PathResult {
        row: EstimateRow {
            path_index: index as u64,
            alpha1: p1.alpha_hat,
            sigma1: p1.sigma_hat,
            alpha2: p2.alpha_hat2,
            sigma2: p2.sigma_hat2,
            rms_mu1: rms(&p1.mu_hat, mu)?,
            rms_mu2: rms(&p2.mu_hat2, mu)?,
        },
        mu_hat: p1.mu_hat,
        mu_hat2: p2.mu_hat2,
        lines,
        sweep,
        reflections: path.reflections,
        warnings,
    })
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += x;
    }
}

/// Simulates and calibrates the whole ensemble in memory.
///
/// Paths run in parallel batches; every reduction walks the paths in index
/// order, so the outcome does not depend on the worker count.
pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let n = cfg.n_steps + 1;
    let trend = cfg.timed_trend()?;
    let mu = trend.sample(n, cfg.dt);
    let times: Vec<f64> = (0..n).map(|i| i as f64 * cfg.dt).collect();
    let sweep = sweep_range(cfg);
    let mut picker = ChaCha8Rng::seed_from_u64(cfg.base_seed);
    picker.set_stream(PICK_STREAM);
    let pick = picker.random_range(0..cfg.n_paths);

    let mut estimates = Vec::with_capacity(cfg.n_paths);
    let mut sum_mu_hat = vec![0.0; n];
    let mut sum_mu_hat2 = vec![0.0; n];
    let mut sum_sweep = vec![vec![0.0; n]; sweep.len()];
    let mut lines_per_path = Vec::with_capacity(cfg.n_paths);
    let mut reflections = 0;
    let mut paths_with_warnings = 0;

    for start in (0..cfg.n_paths).step_by(CHUNK) {
        let end = (start + CHUNK).min(cfg.n_paths);
        let batch: Vec<PathResult> = (start..end)
            .into_par_iter()
            .map(|j| run_path(cfg, &mu, j))
            .collect::<Result<_>>()?;
        for r in batch {
            add_into(&mut sum_mu_hat, &r.mu_hat);
            add_into(&mut sum_mu_hat2, &r.mu_hat2);
            for (acc, s) in sum_sweep.iter_mut().zip(&r.sweep) {
                add_into(acc, s);
            }
            reflections += r.reflections;
            paths_with_warnings += r.warnings;
            lines_per_path.push(r.lines);
            estimates.push(r.row);
        }
    }

    let count = cfg.n_paths as f64;
    let mean = |v: Vec<f64>| v.into_iter().map(|x| x / count).collect::<Vec<f64>>();
    let mean_mu_hat = mean(sum_mu_hat);
    let mean_mu_hat2 = mean(sum_mu_hat2);
    let successive = if sweep.is_empty() {
        BTreeMap::new()
    } else {
        let means: BTreeMap<usize, Vec<f64>> = sweep
            .iter()
            .copied()
            .zip(sum_sweep.into_iter().map(mean))
            .collect();
        successive_l_rms(&means)?
    };

    let column = |f: fn(&EstimateRow) -> f64| estimates.iter().map(f).collect::<Vec<f64>>();
    let alpha1 = summarize(&column(|r| r.alpha1))?;
    let alpha2 = summarize(&column(|r| r.alpha2))?;
    let sigma1 = summarize(&column(|r| r.sigma1))?;
    let sigma2 = summarize(&column(|r| r.sigma2))?;

    // Modal bin set; ties go to the lexicographically smallest set.
    let mut set_counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for lines in &lines_per_path {
        *set_counts
            .entry(lines.iter().map(|l| l.0).collect())
            .or_default() += 1;
    }
    let (modal_bins, modal_count) = set_counts
        .iter()
        .rev()
        .max_by_key(|(_, &c)| c)
        .map(|(b, &c)| (b.clone(), c))
        .ok_or(Error::Empty)?;
    let bin_set_mismatches = cfg.n_paths - modal_count;

    // Pool by rank position over the positions every path has.
    let depth = lines_per_path.iter().map(Vec::len).min().unwrap_or(0);
    let mut positions = Vec::with_capacity(depth);
    for p in 0..depth {
        let pick_col = |f: fn(&(usize, f64, f64, f64)) -> f64| {
            lines_per_path
                .iter()
                .map(|l| f(&l[p]))
                .collect::<Vec<f64>>()
        };
        positions.push(PositionSummary {
            position: p,
            k: summarize(&pick_col(|l| l.1))?,
            a: summarize(&pick_col(|l| l.2))?,
            phi: summarize(&pick_col(|l| l.3))?,
        });
    }
    let period = cfg.period();
    let window_len = (cfg.n_steps as f64) * cfg.dt;
    let modal_harmonics = modal_bins
        .iter()
        .zip(&positions)
        .filter_map(|(&bin, pos)| {
            let k = bin as f64 * period / window_len;
            let kr = k.round();
            ((k - kr).abs() <= 1e-9 * k.max(1.0)).then(|| {
                // A DC line has phase 0 or π (negative level); keep the majority.
                let phi = if kr == 0.0 {
                    if pos.phi.median.abs() > std::f64::consts::FRAC_PI_2 {
                        std::f64::consts::PI
                    } else {
                        0.0
                    }
                } else {
                    pos.phi.median
                };
                Harmonic::new(kr as u32, pos.a.median, phi)
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let picked = &estimates[pick];
    let ms1 = (picked.rms_mu1, picked.rms_mu2);
    let ms2 = (rms(&mean_mu_hat, &mu)?, rms(&mean_mu_hat2, &mu)?);

    Ok(RunOutcome {
        alpha1,
        alpha2,
        sigma1,
        sigma2,
        positions,
        modal_harmonics,
        ms1,
        ms2,
        successive,
        diagnostics: RunDiagnostics {
            n_paths: cfg.n_paths,
            n_samples: n,
            spectral_window: cfg.n_steps,
            trend_period: period,
            rms1_path_index: pick,
            modal_bins,
            modal_count,
            bin_set_mismatches,
            reflections,
            paths_with_warnings,
        },
        estimates,
        times,
        mu,
        mean_mu_hat,
        mean_mu_hat2,
    })
}

/// Runs the experiment and writes its artifacts into `cfg.output_dir`.
///
/// The configuration is validated before any path is simulated. Every file
/// is a pure function of the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let outcome = run_ensemble(cfg)?;
    let files = write_artifacts(cfg, &outcome, &cfg.output_dir)?;
    Ok(RunArtifacts { outcome, files })
}

fn write_artifacts(cfg: &ExperimentConfig, out: &RunOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    let mut file = |name: &str| {
        let p = dir.join(name);
        files.push(p.clone());
        p
    };

    io::write_csv(&file("estimates.csv"), &out.estimates)?;
    for (name, s) in [
        ("summary_alpha1.csv", &out.alpha1),
        ("summary_alpha2.csv", &out.alpha2),
        ("summary_sigma1.csv", &out.sigma1),
        ("summary_sigma2.csv", &out.sigma2),
    ] {
        io::write_csv(&file(name), &io::summary_rows(s))?;
    }

    let harmonic_rows: Vec<HarmonicSummaryRow> = out
        .positions
        .iter()
        .flat_map(|p| {
            [
                ("mean", p.k.mean, p.a.mean, p.phi.mean),
                ("median", p.k.median, p.a.median, p.phi.median),
                ("mode", p.k.mode, p.a.mode, p.phi.mode),
                ("std", p.k.std, p.a.std, p.phi.std),
            ]
            .into_iter()
            .map(|(stat, k, a, phi)| HarmonicSummaryRow {
                position: p.position,
                statistic: stat.into(),
                k,
                a,
                phi,
            })
        })
        .collect();
    io::write_csv(&file("harmonics_summary.csv"), &harmonic_rows)?;
    io::write_harmonics(&file("harmonics_modal.csv"), &out.modal_harmonics)?;

    let metrics = [
        MetricRow::new("rms1_mu_hat", out.ms1.0),
        MetricRow::new("rms1_mu_hat2", out.ms1.1),
        MetricRow::new("rms2_mu_hat", out.ms2.0),
        MetricRow::new("rms2_mu_hat2", out.ms2.1),
    ];
    io::write_csv(&file("metrics.csv"), &metrics)?;

    if !out.successive.is_empty() {
        let rows: Vec<SuccessiveRow> = out
            .successive
            .iter()
            .map(|(&l, &ms)| SuccessiveRow {
                l,
                ms,
                rms: ms.sqrt(),
            })
            .collect();
        io::write_csv(&file("successive_l.csv"), &rows)?;
    }

    let plot: Vec<PlotRow> = (0..out.mu.len())
        .map(|i| PlotRow {
            t: out.times[i],
            mu: out.mu[i],
            mu_hat_mean: out.mean_mu_hat[i],
            mu_hat2_mean: out.mean_mu_hat2[i],
        })
        .collect();
    io::write_csv(&file("plot_data.csv"), &plot)?;

    let write_json = |p: PathBuf, text: String| -> Result<()> {
        std::fs::write(&p, text + "\n").map_err(|e| Error::io(&p, e))
    };
    write_json(file("config.json"), serde_json::to_string_pretty(cfg)?)?;
    write_json(
        file("diagnostics.json"),
        serde_json::to_string_pretty(&out.diagnostics)?,
    )?;
    Ok(files)
}
