//! Config-driven Monte Carlo experiments, table reproduction and artifact I/O.

pub mod config;
pub mod io;
pub mod presets;
pub mod reference;
pub mod run;

pub use config::ExperimentConfig;
pub use presets::{reproduce_table, ComparisonReport, Overrides, PresetId, ReportRow};
pub use run::{run_ensemble, run_experiment, RunArtifacts, RunOutcome};

/// Environment variable that overrides the output root of a config.
pub const OUTPUT_DIR_ENV: &str = "FREV_OUTPUT_DIR";
