//! Named experiment presets and their side-by-side comparison reports.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::deriv::DerivRule;
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::io;
use crate::harness::reference::{base_trend, reference};
use crate::harness::run::{run_experiment, RunOutcome};
use crate::sde::{Gamma, SdeParams};
use crate::smooth::SmootherConfig;

pub const DEFAULT_SEED: u64 = 20_160_401;

/// Wall-clock budget for the full-scale base run, in seconds.
pub const RUNTIME_BUDGET_S: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PresetId {
    #[serde(rename = "table2")]
    Table2,
    #[serde(rename = "table3")]
    Table3,
    #[serde(rename = "table4")]
    Table4,
    #[serde(rename = "table5")]
    Table5,
    #[serde(rename = "table6")]
    Table6,
    #[serde(rename = "appendixB")]
    AppendixB,
    #[serde(rename = "appendixC")]
    AppendixC,
}

impl PresetId {
    pub const ALL: [PresetId; 7] = [
        PresetId::Table2,
        PresetId::Table3,
        PresetId::Table4,
        PresetId::Table5,
        PresetId::Table6,
        PresetId::AppendixB,
        PresetId::AppendixC,
    ];

    pub fn id(self) -> &'static str {
        match self {
            PresetId::Table2 => "table2",
            PresetId::Table3 => "table3",
            PresetId::Table4 => "table4",
            PresetId::Table5 => "table5",
            PresetId::Table6 => "table6",
            PresetId::AppendixB => "appendixB",
            PresetId::AppendixC => "appendixC",
        }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetId::ALL
            .into_iter()
            .find(|p| p.id() == s)
            .ok_or_else(|| {
                let ids: Vec<&str> = PresetId::ALL.iter().map(|p| p.id()).collect();
                Error::InvalidParameter(format!(
                    "unknown preset '{s}'; expected one of {}",
                    ids.join(", ")
                ))
            })
    }
}

/// Base experiment: γ = 0, α = 20, σ = 1.1, 1000 paths of 4000 steps at
/// dt = 1/250, HP λ = 40000, ten retained harmonics.
fn base() -> ExperimentConfig {
    ExperimentConfig {
        sde: SdeParams::new(20.0, 1.1, Gamma::Zero).expect("valid base parameters"),
        trend: base_trend(),
        x0: None,
        n_steps: 4000,
        dt: 1.0 / 250.0,
        n_paths: 1000,
        base_seed: DEFAULT_SEED,
        smoother: SmootherConfig::HodrickPrescott { lambda: 40_000.0 },
        deriv_rule: DerivRule::ThreePoint,
        l_sum: 10,
        trend_period: None,
        l_sweep: None,
        output_dir: PathBuf::from("out"),
    }
}

/// The first (or only) configuration of a preset.
pub fn base_config(id: PresetId) -> ExperimentConfig {
    preset_runs(id).remove(0).1
}

/// Every sub-run of a preset as `(label, config)`; only table6 has several.
pub fn preset_runs(id: PresetId) -> Vec<(String, ExperimentConfig)> {
    let mut cfg = base();
    cfg.output_dir = PathBuf::from("out").join(id.id());
    match id {
        PresetId::Table3 | PresetId::Table4 | PresetId::Table5 => {}
        PresetId::Table2 => cfg.l_sweep = Some([6, 13]),
        PresetId::Table6 => {
            return [(10u32, 1.0 / 10.0), (50, 1.0 / 50.0), (100, 1.0 / 100.0)]
                .into_iter()
                .map(|(inv, dt)| {
                    let mut c = cfg.clone();
                    c.dt = dt;
                    let label = format!("dt{inv}");
                    c.output_dir = c.output_dir.join(&label);
                    (label, c)
                })
                .collect();
        }
        PresetId::AppendixB => {
            cfg.sde = SdeParams::new(30.0, 0.2, Gamma::One).expect("valid parameters");
            cfg.smoother = SmootherConfig::HodrickPrescott { lambda: 400_000.0 };
        }
        PresetId::AppendixC => {
            cfg.sde = SdeParams::new(23.0, 0.6, Gamma::Half).expect("valid parameters");
            cfg.smoother = SmootherConfig::HodrickPrescott { lambda: 400_000.0 };
        }
    }
    vec![(id.id().to_string(), cfg)]
}

/// Partial configuration applied on top of a preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n_paths: Option<usize>,
    pub n_steps: Option<usize>,
    pub base_seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = self.n_paths {
            cfg.n_paths = v;
        }
        if let Some(v) = self.n_steps {
            cfg.n_steps = v;
        }
        if let Some(v) = self.base_seed {
            cfg.base_seed = v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub quantity: String,
    /// Reference value, when one exists.
    pub published: Option<f64>,
    pub computed: f64,
    pub criterion: String,
    /// `None` for informational rows.
    pub pass: Option<bool>,
}

impl ReportRow {
    fn info(quantity: impl Into<String>, published: Option<f64>, computed: f64) -> Self {
        Self {
            quantity: quantity.into(),
            published,
            computed,
            criterion: String::new(),
            pass: None,
        }
    }

    fn check(
        quantity: impl Into<String>,
        published: Option<f64>,
        computed: f64,
        criterion: impl Into<String>,
        pass: bool,
    ) -> Self {
        Self {
            quantity: quantity.into(),
            published,
            computed,
            criterion: criterion.into(),
            pass: Some(pass),
        }
    }

    fn within(quantity: &str, published: Option<f64>, computed: f64, lo: f64, hi: f64) -> Self {
        Self::check(
            quantity,
            published,
            computed,
            format!("in [{lo}, {hi}]"),
            (lo..=hi).contains(&computed),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub preset: PresetId,
    pub rows: Vec<ReportRow>,
    pub runtime_s: f64,
}

impl ComparisonReport {
    pub fn checks(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.pass.is_some())
    }

    pub fn all_pass(&self) -> bool {
        self.checks().all(|r| r.pass == Some(true))
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} ({:.1} s)", self.preset, self.runtime_s)?;
        for r in &self.rows {
            let status = match r.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "    ",
            };
            let published = r
                .published
                .map_or_else(|| "-".to_string(), |p| format!("{p}"));
            writeln!(
                f,
                "  {status}  {:<32} published {:<10} computed {:<14.6} {}",
                r.quantity, published, r.computed, r.criterion
            )?;
        }
        Ok(())
    }
}

/// One finished sub-run handed to [`evaluate`].
pub struct PresetRun<'a> {
    pub label: &'a str,
    pub config: &'a ExperimentConfig,
    pub outcome: &'a RunOutcome,
}

fn published(table: &str, quantity: &str) -> Option<f64> {
    reference().get(table, quantity).map(|v| v.value)
}

fn ordering_row(tag: &str, truth: f64, a1: f64, a2: f64) -> ReportRow {
    let (d1, d2) = ((a1 - truth).abs(), (a2 - truth).abs());
    ReportRow::check(
        format!("{tag}|alpha2_mean - {truth}|"),
        None,
        d2,
        format!("< |alpha1_mean - {truth}| = {d1:.4}"),
        d2 < d1,
    )
}

fn summary_rows(table: &str, out: &RunOutcome) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for (name, s) in [
        ("alpha1", &out.alpha1),
        ("alpha2", &out.alpha2),
        ("sigma1", &out.sigma1),
        ("sigma2", &out.sigma2),
    ] {
        for (stat, v) in [("median", s.median), ("mode", s.mode), ("std", s.std)] {
            let q = format!("{name}_{stat}");
            rows.push(ReportRow::info(q.clone(), published(table, &q), v));
        }
    }
    rows
}

/// Checks the finished runs of a preset against its acceptance tolerances.
///
/// `runtime_s` is the wall-clock time of the run; it is only checked for table3.
pub fn evaluate(
    id: PresetId,
    runs: &[PresetRun<'_>],
    runtime_s: Option<f64>,
) -> Result<Vec<ReportRow>> {
    let first = runs.first().ok_or(Error::Empty)?;
    let out = first.outcome;
    let cfg = first.config;
    let t = id.id();
    let mut rows = Vec::new();
    match id {
        PresetId::Table3 => {
            let (a1, a2) = (out.alpha1.mean, out.alpha2.mean);
            rows.push(ReportRow::within(
                "alpha1_mean",
                published(t, "alpha1_mean"),
                a1,
                36.0,
                47.0,
            ));
            rows.push(ReportRow::within(
                "alpha2_mean",
                published(t, "alpha2_mean"),
                a2,
                20.0,
                28.0,
            ));
            rows.push(ordering_row("", cfg.sde.alpha, a1, a2));
            rows.push(ReportRow::within(
                "sigma1_mean",
                published(t, "sigma1_mean"),
                out.sigma1.mean,
                1.04,
                1.10,
            ));
            rows.push(ReportRow::within(
                "sigma2_mean",
                published(t, "sigma2_mean"),
                out.sigma2.mean,
                1.078,
                1.122,
            ));
            if let Some(secs) = runtime_s {
                rows.push(ReportRow::check(
                    "runtime_s",
                    None,
                    secs,
                    format!("<= {RUNTIME_BUDGET_S}"),
                    secs <= RUNTIME_BUDGET_S,
                ));
            }
            rows.extend(summary_rows(t, out));
        }
        PresetId::Table4 => {
            let truth = cfg.trend.harmonics();
            let truth_bins: Vec<usize> = truth
                .iter()
                .map(|h| (h.k as f64 * cfg.n_steps as f64 * cfg.dt / cfg.period()).round() as usize)
                .collect();
            let modal = &out.diagnostics.modal_bins;
            let differing = modal.iter().filter(|b| !truth_bins.contains(b)).count()
                + truth_bins.iter().filter(|b| !modal.contains(b)).count();
            rows.push(ReportRow::check(
                "modal_bins_differing",
                None,
                differing as f64,
                format!("= 0; modal {modal:?}, expected {truth_bins:?}"),
                differing == 0,
            ));
            rows.push(ReportRow::info(
                "paths_off_modal_set",
                None,
                out.diagnostics.bin_set_mismatches as f64,
            ));
            for h in truth {
                let q = format!("a{}_median", h.k);
                let tol = if h.k == 0 { 0.01 } else { 0.02 };
                let got = out.modal_harmonics.iter().find(|m| m.k == h.k).map(|m| m.a);
                let computed = got.unwrap_or(f64::NAN);
                rows.push(ReportRow::check(
                    q.clone(),
                    published(t, &q),
                    computed,
                    format!("within {tol} of {}", h.a),
                    (computed - h.a).abs() <= tol,
                ));
            }
        }
        PresetId::Table5 => {
            let (m1, m2) = out.ms2;
            rows.push(ReportRow::info(
                "ms1_mu1",
                published(t, "ms1_mu1"),
                out.ms1.0,
            ));
            rows.push(ReportRow::info(
                "ms1_mu2",
                published(t, "ms1_mu2"),
                out.ms1.1,
            ));
            rows.push(ReportRow::check(
                "ms2_mu1",
                published(t, "ms2_mu1"),
                m1,
                "< 5e-3",
                m1 < 5e-3,
            ));
            rows.push(ReportRow::check(
                "ms2_mu2",
                published(t, "ms2_mu2"),
                m2,
                format!("< 5e-3 and <= ms2_mu1 = {m1:.6}"),
                m2 < 5e-3 && m2 <= m1,
            ));
        }
        PresetId::Table2 => {
            for (&l, &ms) in &out.successive {
                let q = format!("successive_ms_L{l}");
                rows.push(ReportRow::info(q.clone(), published(t, &q), ms));
            }
            let at = |l: usize| out.successive.get(&l).copied().ok_or(Error::MissingL(l));
            let l = cfg.l_sum;
            let ratio = at(l)? / at(l + 1)?;
            rows.push(ReportRow::check(
                format!("ratio_L{l}_over_L{}", l + 1),
                published(t, &format!("successive_ms_L{l}"))
                    .zip(published(t, &format!("successive_ms_L{}", l + 1)))
                    .map(|(a, b)| a / b),
                ratio,
                ">= 100",
                ratio >= 100.0,
            ));
        }
        PresetId::Table6 => {
            let mut devs = Vec::new();
            for run in runs {
                let o = run.outcome;
                let tag = run.label;
                rows.push(ReportRow::info(
                    format!("{tag}_alpha1_mean"),
                    published(t, &format!("{tag}_alpha1_mean")),
                    o.alpha1.mean,
                ));
                rows.push(ReportRow::info(
                    format!("{tag}_sigma2_mean"),
                    published(t, &format!("{tag}_sigma2_mean")),
                    o.sigma2.mean,
                ));
                let q = format!("{tag}_alpha2_mean");
                let a2 = o.alpha2.mean;
                if tag == "dt10" {
                    rows.push(ReportRow::within(&q, published(t, &q), a2, 19.0, 21.0));
                    let q = format!("{tag}_alpha2_std");
                    rows.push(ReportRow::check(
                        q.clone(),
                        published(t, &q),
                        o.alpha2.std,
                        "< 0.1",
                        o.alpha2.std < 0.1,
                    ));
                } else {
                    rows.push(ReportRow::info(q.clone(), published(t, &q), a2));
                }
                devs.push((run.config.dt, (a2 - run.config.sde.alpha).abs()));
            }
            // Deviation must not grow as dt grows.
            devs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let monotone = devs.windows(2).all(|w| w[1].1 <= w[0].1);
            let listing: Vec<String> = devs
                .iter()
                .map(|(dt, d)| format!("dt={dt}: {d:.4}"))
                .collect();
            rows.push(ReportRow::check(
                "alpha2_deviation_non_increasing",
                None,
                devs.last().map_or(f64::NAN, |d| d.1),
                listing.join(", "),
                monotone,
            ));
        }
        PresetId::AppendixB | PresetId::AppendixC => {
            let sigma = cfg.sde.sigma;
            let s2 = out.sigma2.mean;
            rows.push(ReportRow::info(
                "alpha1_mean",
                published(t, "alpha1_mean"),
                out.alpha1.mean,
            ));
            rows.push(ReportRow::info(
                "alpha2_mean",
                published(t, "alpha2_mean"),
                out.alpha2.mean,
            ));
            rows.push(ReportRow::info(
                "sigma1_mean",
                published(t, "sigma1_mean"),
                out.sigma1.mean,
            ));
            rows.push(ReportRow::check(
                "sigma2_mean",
                published(t, "sigma2_mean"),
                s2,
                format!("within 2% of {sigma}"),
                ((s2 - sigma) / sigma).abs() <= 0.02,
            ));
            rows.push(ordering_row(
                "",
                cfg.sde.alpha,
                out.alpha1.mean,
                out.alpha2.mean,
            ));
            rows.push(ReportRow::info(
                "reflections",
                None,
                out.diagnostics.reflections as f64,
            ));
        }
    }
    Ok(rows)
}

/// Runs a preset under `out_root/<id>`, compares it with the published
/// values and writes `report.csv` next to the run artifacts.
pub fn reproduce_table(
    id: PresetId,
    out_root: &Path,
    overrides: &Overrides,
) -> Result<ComparisonReport> {
    let mut runs = preset_runs(id);
    let multi = runs.len() > 1;
    let dir = out_root.join(id.id());
    for (label, cfg) in &mut runs {
        overrides.apply(cfg);
        cfg.output_dir = if multi {
            dir.join(&*label)
        } else {
            dir.clone()
        };
        cfg.validate()?;
    }
    let start = Instant::now();
    let outcomes = runs
        .iter()
        .map(|(_, cfg)| run_experiment(cfg).map(|a| a.outcome))
        .collect::<Result<Vec<_>>>()?;
    let runtime_s = start.elapsed().as_secs_f64();
    let finished: Vec<PresetRun<'_>> = runs
        .iter()
        .zip(&outcomes)
        .map(|((label, config), outcome)| PresetRun {
            label,
            config,
            outcome,
        })
        .collect();
    let rows = evaluate(id, &finished, Some(runtime_s))?;
    io::write_csv(&dir.join("report.csv"), &rows)?;
    Ok(ComparisonReport {
        preset: id,
        rows,
        runtime_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in PresetId::ALL {
            assert_eq!(id.id().parse::<PresetId>().unwrap(), id);
        }
        assert!("table7".parse::<PresetId>().is_err());
    }

    #[test]
    fn presets_are_valid() {
        for id in PresetId::ALL {
            for (_, cfg) in preset_runs(id) {
                cfg.validate().unwrap();
            }
        }
        let dts: Vec<f64> = preset_runs(PresetId::Table6)
            .iter()
            .map(|r| r.1.dt)
            .collect();
        assert_eq!(dts, vec![0.1, 0.02, 0.01]);
        assert!(preset_runs(PresetId::Table6)
            .iter()
            .all(|r| r.1.n_steps == 4000));
        let b = base_config(PresetId::AppendixB);
        assert_eq!(
            (b.sde.alpha, b.sde.sigma, b.sde.gamma),
            (30.0, 0.2, Gamma::One)
        );
        let c = base_config(PresetId::AppendixC);
        assert_eq!(
            (c.sde.alpha, c.sde.sigma, c.sde.gamma),
            (23.0, 0.6, Gamma::Half)
        );
    }

    #[test]
    fn small_reproduction_writes_report() {
        let dir = tempfile::tempdir().unwrap();
        let ov = Overrides {
            n_paths: Some(4),
            n_steps: Some(500),
            base_seed: Some(3),
        };
        let report = reproduce_table(PresetId::Table2, dir.path(), &ov).unwrap();
        assert!(dir.path().join("table2/report.csv").exists());
        assert!(report
            .rows
            .iter()
            .any(|r| r.quantity == "ratio_L10_over_L11"));
        let rows: Vec<ReportRow> = io::read_csv(&dir.path().join("table2/report.csv")).unwrap();
        assert_eq!(rows, report.rows);
    }
}
