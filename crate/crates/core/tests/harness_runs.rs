use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use fourier_reversion::harness::io::{
    self, EstimateRow, HarmonicSummaryRow, MetricRow, PlotRow, StatisticRow, SuccessiveRow,
};
use fourier_reversion::harness::presets::{base_config, PresetId};
use fourier_reversion::harness::{run_experiment, ExperimentConfig};

fn smoke(dir: &Path) -> ExperimentConfig {
    let mut cfg = base_config(PresetId::Table2);
    cfg.n_paths = 2;
    cfg.n_steps = 100;
    cfg.output_dir = dir.to_path_buf();
    cfg
}

fn read_all(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn smoke_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let art = run_experiment(&smoke(dir.path())).unwrap();
    for name in [
        "estimates.csv",
        "summary_alpha1.csv",
        "summary_alpha2.csv",
        "summary_sigma1.csv",
        "summary_sigma2.csv",
        "harmonics_summary.csv",
        "harmonics_modal.csv",
        "metrics.csv",
        "successive_l.csv",
        "plot_data.csv",
        "config.json",
        "diagnostics.json",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    assert_eq!(art.files.len(), 12);
    let rows: Vec<EstimateRow> = io::read_csv(&dir.path().join("estimates.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    let header = fs::read_to_string(dir.path().join("estimates.csv")).unwrap();
    assert!(header.starts_with("path_index,alpha1,sigma1,alpha2,sigma2,rms_mu1,rms_mu2\n"));
}

#[test]
fn artifacts_parse_back_through_their_readers() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = smoke(d);
    let out = run_experiment(&cfg).unwrap().outcome;

    let rows: Vec<EstimateRow> = io::read_csv(&d.join("estimates.csv")).unwrap();
    assert_eq!(rows, out.estimates);
    let s: Vec<StatisticRow> = io::read_csv(&d.join("summary_alpha2.csv")).unwrap();
    assert_eq!(io::summary_from_rows(&s).unwrap(), out.alpha2);
    let h: Vec<HarmonicSummaryRow> = io::read_csv(&d.join("harmonics_summary.csv")).unwrap();
    assert_eq!(h.len(), 4 * out.positions.len());
    assert_eq!(
        io::read_harmonics(&d.join("harmonics_modal.csv")).unwrap(),
        out.modal_harmonics
    );
    let m: Vec<MetricRow> = io::read_csv(&d.join("metrics.csv")).unwrap();
    assert_eq!(m[2].ms, out.ms2.0);
    let sl: Vec<SuccessiveRow> = io::read_csv(&d.join("successive_l.csv")).unwrap();
    assert_eq!(
        sl.iter().map(|r| r.l).collect::<Vec<_>>(),
        (7..=13).collect::<Vec<_>>()
    );
    let plot: Vec<PlotRow> = io::read_csv(&d.join("plot_data.csv")).unwrap();
    assert_eq!(plot.len(), cfg.n_steps + 1);
    assert_eq!(
        plot.iter().map(|r| r.mu_hat2_mean).collect::<Vec<_>>(),
        out.mean_mu_hat2
    );
    let back = ExperimentConfig::from_json_file(&d.join("config.json")).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn same_config_gives_byte_identical_artifacts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut cfg = smoke(a.path());
    cfg.n_paths = 5;
    run_experiment(&cfg).unwrap();
    cfg.output_dir = b.path().to_path_buf();
    run_experiment(&cfg).unwrap();
    let (fa, mut fb) = (read_all(a.path()), read_all(b.path()));
    // config.json records its own output directory.
    fb.insert("config.json".into(), fa["config.json"].clone());
    assert_eq!(fa, fb);
}

#[test]
fn table3_scale_means_on_a_reduced_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = base_config(PresetId::Table3);
    cfg.n_paths = 100;
    cfg.output_dir = dir.path().to_path_buf();
    let out = run_experiment(&cfg).unwrap().outcome;
    assert!(
        (20.0..=28.0).contains(&out.alpha2.mean),
        "{}",
        out.alpha2.mean
    );
    assert!(
        (1.078..=1.122).contains(&out.sigma2.mean),
        "{}",
        out.sigma2.mean
    );
}
