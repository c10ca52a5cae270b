use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::deriv::DerivRule;
use crate::error::{Error, Result};
use crate::estimate::EstimationSettings;
use crate::sde::SdeParams;
use crate::smooth::SmootherConfig;
use crate::trend::FourierTrend;

/// One Monte Carlo experiment. Field names double as the JSON schema.
///
/// Time is measured in the units of `dt`. The trend completes one period
/// every `trend_period` time units; when absent it spans the sampling
/// window `n_steps · dt`, so DFT bins coincide with harmonic indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sde: SdeParams,
    pub trend: FourierTrend,
    /// Initial level; defaults to μ(0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    pub n_steps: usize,
    pub dt: f64,
    pub n_paths: usize,
    pub base_seed: u64,
    pub smoother: SmootherConfig,
    pub deriv_rule: DerivRule,
    #[serde(rename = "L_sum")]
    pub l_sum: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trend_period: Option<f64>,
    /// Inclusive range of L values for the successive-L table, e.g. `[6, 13]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_sweep: Option<[usize; 2]>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)?;
        Ok(cfg)
    }

    pub fn period(&self) -> f64 {
        self.trend_period.unwrap_or(self.n_steps as f64 * self.dt)
    }

    /// The trend on this experiment's clock.
    pub fn timed_trend(&self) -> Result<FourierTrend> {
        self.trend.clone().with_period(self.period())
    }

    pub fn x0(&self) -> Result<f64> {
        Ok(self.x0.unwrap_or(self.timed_trend()?.eval(0.0)))
    }

    pub fn settings(&self) -> EstimationSettings {
        EstimationSettings {
            smoother: self.smoother,
            deriv_rule: self.deriv_rule,
            gamma: self.sde.gamma,
            l_sum: self.l_sum,
            trend_period: Some(self.period()),
        }
    }

    /// Checks every invariant up front so nothing is simulated for a bad config.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_steps < 4 {
            return bad(format!("n_steps must be >= 4, got {}", self.n_steps));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if self.n_paths < 1 {
            return bad("n_paths must be >= 1".into());
        }
        if self.l_sum < 1 {
            return bad("L_sum must be >= 1".into());
        }
        if let Some([lo, hi]) = self.l_sweep {
            if lo < 1 || hi <= lo {
                return bad(format!(
                    "l_sweep must satisfy 1 <= lo < hi, got [{lo}, {hi}]"
                ));
            }
        }
        self.smoother.validate()?;
        let len = self.n_steps + 1;
        let need = self.smoother.min_len().max(self.deriv_rule.min_len());
        if len < need {
            return Err(Error::SeriesTooShort {
                required: need,
                actual: len,
            });
        }
        let x0 = self.x0()?;
        if self.sde.gamma.requires_positive() && x0 <= 0.0 {
            return Err(Error::Domain(format!(
                "x0 must be > 0 for gamma = {}, got {x0}",
                self.sde.gamma.as_f64()
            )));
        }
        // Every trend harmonic must land on a DFT bin of the sampling window.
        let cycles = self.n_steps as f64 * self.dt / self.period();
        if (cycles - cycles.round()).abs() > 1e-9 * cycles.max(1.0) || cycles.round() < 1.0 {
            return bad(format!(
                "the sampling window n_steps*dt holds {cycles} trend periods; it must be a whole number"
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets::{base_config, PresetId};

    #[test]
    fn json_round_trip_and_schema_names() {
        let cfg = base_config(PresetId::Table3);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        for key in [
            "\"sde\"",
            "\"trend\"",
            "\"n_steps\"",
            "\"dt\"",
            "\"n_paths\"",
            "\"base_seed\"",
            "\"smoother\"",
            "\"deriv_rule\"",
            "\"L_sum\"",
            "\"output_dir\"",
        ] {
            assert!(text.contains(key), "{key}");
        }
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn defaults_and_validation() {
        let mut cfg = base_config(PresetId::Table3);
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.period(), 16.0);
        assert!((cfg.x0().unwrap() - 7.097004310491447).abs() < 1e-12);
        cfg.trend_period = Some(1.0);
        assert!(cfg.validate().is_ok());
        cfg.trend_period = Some(0.3);
        assert!(cfg.validate().is_err());
        let mut cfg = base_config(PresetId::Table3);
        cfg.n_paths = 0;
        assert!(cfg.validate().is_err());
        let text = r#"{"sde":{"alpha":1,"sigma":1,"gamma":0.7}}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(text).is_err());
    }
}
