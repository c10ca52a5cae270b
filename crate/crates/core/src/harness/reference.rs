//! Published reference values, loaded from the versioned `data/reference.json`.

use std::sync::OnceLock;

use serde::Deserialize;

use crate::trend::{FourierTrend, Harmonic};

const REFERENCE_JSON: &str = include_str!("../../data/reference.json");

#[derive(Debug, Clone, Deserialize)]
pub struct ReferenceValue {
    pub table: String,
    pub quantity: String,
    pub value: f64,
    pub citation: String,
}

#[derive(Debug, Deserialize)]
struct BaseTrend {
    #[allow(dead_code)]
    citation: String,
    harmonics: Vec<Harmonic>,
}

#[derive(Debug, Deserialize)]
pub struct ReferenceData {
    pub version: u32,
    base_trend: BaseTrend,
    pub values: Vec<ReferenceValue>,
}

impl ReferenceData {
    pub fn get(&self, table: &str, quantity: &str) -> Option<&ReferenceValue> {
        self.values
            .iter()
            .find(|v| v.table == table && v.quantity == quantity)
    }
}

pub fn reference() -> &'static ReferenceData {
    static DATA: OnceLock<ReferenceData> = OnceLock::new();
    DATA.get_or_init(|| {
        serde_json::from_str(REFERENCE_JSON).expect("bundled reference.json is valid")
    })
}

/// The ten-harmonic base trend used by every experiment preset, with the
/// default period of one time unit.
pub fn base_trend() -> FourierTrend {
    FourierTrend::new(reference().base_trend.harmonics.clone())
        .expect("bundled base trend is valid")
}
