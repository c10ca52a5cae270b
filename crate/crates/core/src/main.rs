use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fourier_reversion::harness::io;
use fourier_reversion::harness::reference::base_trend;
use fourier_reversion::harness::{
    reproduce_table, ExperimentConfig, Overrides, PresetId, OUTPUT_DIR_ENV,
};
use fourier_reversion::{
    estimate::{estimate_path, EstimationSettings},
    simulate_path, DerivRule, Error, FourierTrend, Gamma, SdeParams, SeedSpec, SmootherConfig,
};

#[derive(Parser)]
#[command(
    name = "frev",
    version,
    about = "Mean-reversion processes with a periodic Fourier trend"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one path and write it as `t,x` CSV.
    Simulate(SimulateArgs),
    /// Calibrate a `t,x` path CSV and print the report as JSON.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment from a JSON config.
    Montecarlo(MontecarloArgs),
    /// Run a named preset and compare it with the published values.
    ReproduceTable(ReproduceArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 20.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.1)]
    sigma: f64,
    /// 0, 0.5 (or 1/2), or 1.
    #[arg(long, default_value = "0")]
    gamma: Gamma,
    #[arg(long, default_value_t = 4000)]
    n_steps: usize,
    #[arg(long, default_value_t = 0.004)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    path_index: u64,
    /// Initial level; defaults to the trend at t = 0.
    #[arg(long)]
    x0: Option<f64>,
    /// JSON array of {k, a, phi}; defaults to the bundled ten-harmonic trend.
    #[arg(long)]
    trend: Option<PathBuf>,
    /// Trend period in time units; defaults to n_steps * dt.
    #[arg(long)]
    trend_period: Option<f64>,
    /// Output CSV; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmootherKind {
    Hp,
    Ma,
    Ema,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    ThreePoint,
    FivePoint,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    gamma: Gamma,
    #[arg(long, value_enum, default_value = "hp")]
    smoother: SmootherKind,
    /// HP penalty.
    #[arg(long, default_value_t = 40_000.0)]
    lambda: f64,
    /// Moving-average window or exponential-smoothing period.
    #[arg(long, default_value_t = 25)]
    window: usize,
    #[arg(long, value_enum, default_value = "three-point")]
    deriv: RuleArg,
    #[arg(long, default_value_t = 10)]
    l_sum: usize,
    /// Trend period in time units; defaults to the sampling window.
    #[arg(long)]
    trend_period: Option<f64>,
    /// Output JSON; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MontecarloArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// table2, table3, table4, table5, table6, appendixB or appendixC.
    id: PresetId,
    /// Root directory for artifacts; the run goes under `<root>/<id>`.
    #[arg(long)]
    output_root: Option<PathBuf>,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn env_dir() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from)
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            }),
    }
}

fn simulate(a: SimulateArgs) -> Result<(), Error> {
    let params = SdeParams::new(a.alpha, a.sigma, a.gamma)?;
    let trend = match &a.trend {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?;
            serde_json::from_str::<FourierTrend>(&text)?
        }
        None => base_trend(),
    };
    let period = a.trend_period.unwrap_or(a.n_steps as f64 * a.dt);
    let trend = trend.with_period(period)?;
    let x0 = a.x0.unwrap_or_else(|| trend.eval(0.0));
    let path = simulate_path(
        &params,
        &trend,
        x0,
        a.n_steps,
        a.dt,
        SeedSpec::new(a.seed, a.path_index),
    )?;
    match &a.output {
        Some(p) => io::write_path_csv(p, &path),
        None => io::write_path(std::io::stdout().lock(), &path),
    }
}

fn estimate(a: EstimateArgs) -> Result<(), Error> {
    let path = io::read_path_csv(&a.input)?;
    let smoother = match a.smoother {
        SmootherKind::Hp => SmootherConfig::HodrickPrescott { lambda: a.lambda },
        SmootherKind::Ma => SmootherConfig::MovingAverage { window: a.window },
        SmootherKind::Ema => SmootherConfig::Exponential { period: a.window },
    };
    let deriv_rule = match a.deriv {
        RuleArg::ThreePoint => DerivRule::ThreePoint,
        RuleArg::FivePoint => DerivRule::FivePoint,
    };
    let settings = EstimationSettings {
        smoother,
        deriv_rule,
        gamma: a.gamma,
        l_sum: a.l_sum,
        trend_period: a.trend_period,
    };
    let report = estimate_path(&path, &settings)?;
    for w in &report.diagnostics.warnings {
        log::warn!("{w}");
    }
    emit(
        a.output.as_ref(),
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )
}

fn montecarlo(a: MontecarloArgs) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::from_json_file(&a.config)?;
    if let Some(dir) = a.output_dir.or_else(env_dir) {
        cfg.output_dir = dir;
    }
    Overrides {
        n_paths: a.n_paths,
        n_steps: a.n_steps,
        base_seed: a.seed,
    }
    .apply(&mut cfg);
    let artifacts = fourier_reversion::harness::run_experiment(&cfg)?;
    let o = &artifacts.outcome;
    eprintln!(
        "{} paths: alpha1 {:.4}  alpha2 {:.4}  sigma1 {:.4}  sigma2 {:.4}",
        cfg.n_paths, o.alpha1.mean, o.alpha2.mean, o.sigma1.mean, o.sigma2.mean
    );
    for f in &artifacts.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn reproduce(a: ReproduceArgs) -> Result<(), Error> {
    let root = a
        .output_root
        .or_else(env_dir)
        .unwrap_or_else(|| PathBuf::from("out"));
    let overrides = Overrides {
        n_paths: a.n_paths,
        n_steps: a.n_steps,
        base_seed: a.seed,
    };
    let report = reproduce_table(a.id, &root, &overrides)?;
    print!("{report}");
    println!(
        "report: {}",
        root.join(a.id.id()).join("report.csv").display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Montecarlo(a) => montecarlo(a),
        Command::ReproduceTable(a) => reproduce(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
