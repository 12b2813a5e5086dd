//! With/without-coupling relay studies and their tabular reports.

mod eval;
mod reach;
mod render;
mod sweep;

pub use eval::{distance_apparent_impedance, goc_time, read_relay, RelayReading};
pub use reach::{run_reach_study, ReachOutcome, ReachReport, ReachRow, ReachSpec};
pub use render::{format_location, format_time, render_reach, render_report, ReportFormat};
pub use sweep::{
    run_goc_sweep, run_line_end_study, run_pilot_study, LineEndBlock, LineEndSpec, PilotSpec,
    SweepSpec,
};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::network::{hex_digest, Network};
use crate::relay::NO_TRIP;

/// Identifies the inputs a report was produced from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub network_hash: String,
    pub settings_hash: String,
    /// Left empty by the library so output is reproducible; callers may stamp it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl ReportMetadata {
    pub fn new<S: Serialize>(n: &Network, settings: &S) -> Self {
        let settings = serde_json::to_string(settings).expect("settings serialize");
        Self {
            network_hash: n.content_hash(),
            settings_hash: hex_digest(settings.as_bytes()),
            timestamp: None,
        }
    }
}

/// One fault location. Times are seconds or the 9999 sentinel; `None` only
/// when the row failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub section: Option<String>,
    pub location: String,
    pub fraction: f64,
    #[serde(serialize_with = "time_opt")]
    pub first_without_mc: Option<f64>,
    #[serde(serialize_with = "time_opt")]
    pub first_with_mc: Option<f64>,
    #[serde(serialize_with = "time_opt")]
    pub second_without_mc: Option<f64>,
    #[serde(serialize_with = "time_opt")]
    pub second_with_mc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReportRow {
    /// Row from stored values, as printed in a results table.
    pub fn from_times(location: impl Into<String>, fraction: f64, times: [f64; 4]) -> Self {
        Self {
            section: None,
            location: location.into(),
            fraction,
            first_without_mc: Some(times[0]),
            first_with_mc: Some(times[1]),
            second_without_mc: Some(times[2]),
            second_with_mc: Some(times[3]),
            error: None,
        }
    }

    pub fn failed(section: Option<String>, fraction: f64, err: &Error) -> Self {
        Self {
            section,
            location: format_location(fraction),
            fraction,
            first_without_mc: None,
            first_with_mc: None,
            second_without_mc: None,
            second_with_mc: None,
            error: Some(err.to_string()),
        }
    }

    pub fn times(&self) -> [Option<f64>; 4] {
        [
            self.first_without_mc,
            self.first_with_mc,
            self.second_without_mc,
            self.second_with_mc,
        ]
    }
}

fn time_opt<S: Serializer>(t: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match t {
        Some(t) if *t == NO_TRIP => s.serialize_u32(NO_TRIP as u32),
        Some(t) => s.serialize_f64(*t),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub title: String,
    /// Labels of the two relay column groups, e.g. primary and backup relay.
    pub groups: [String; 2],
    pub rows: Vec<ReportRow>,
    pub metadata: ReportMetadata,
}

impl StudyReport {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    fn has_sections(&self) -> bool {
        self.rows.iter().any(|r| r.section.is_some())
    }
}

pub const DEFAULT_SWEEP_FRACTIONS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
pub const DEFAULT_NEAR_END_FRACTIONS: [f64; 5] = [0.005, 0.05, 0.10, 0.15, 0.20];
pub const DEFAULT_REMOTE_END_FRACTIONS: [f64; 5] = [0.80, 0.85, 0.90, 0.95, 0.995];

pub(crate) fn check_fractions(fr: &[f64]) -> Result<()> {
    if fr.is_empty() {
        return Err(Error::Parameter("no fault locations given".into()));
    }
    for &m in fr {
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::Parameter(format!(
                "fault location {m} must lie strictly inside (0, 1)"
            )));
        }
    }
    Ok(())
}
