//! Per-unit short-circuit network: buses, Thevenin sources, branches with
//! sequence impedances, zero-sequence coupling records and relay settings.

mod file;
mod validate;

pub use file::{load_network, ohms_to_pu, parse_network, to_json, FORMAT_VERSION};
pub use validate::{validate, Rule, Violation};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::relay::{DirectionSettings, DistanceSetting, GocSetting, PilotConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: String,
    /// Nominal line-to-line voltage, kV.
    pub kv: f64,
}

/// Thevenin equivalent at a bus. Negative-sequence impedance equals `z1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub id: String,
    pub bus: String,
    /// Phase-a EMF of a balanced positive-sequence set, pu.
    pub emf: Complex64,
    pub z1: Complex64,
    pub z0: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchStatus {
    #[default]
    InService,
    /// Disconnected from both buses, conductors grounded at both ends.
    OutOfServiceGrounded,
    OpenAtFrom,
    OpenAtTo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    pub z1: Complex64,
    pub z0: Complex64,
    pub length_km: f64,
    pub status: BranchStatus,
}

/// Fractional interval `[from, to]` along a branch measured from its from-bus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Span {
    pub from: f64,
    pub to: f64,
}

impl Span {
    pub const FULL: Span = Span { from: 0.0, to: 1.0 };

    pub fn len(&self) -> f64 {
        self.to - self.from
    }

    pub fn is_ordered(&self) -> bool {
        0.0 <= self.from && self.from < self.to && self.to <= 1.0
    }
}

impl From<[f64; 2]> for Span {
    fn from(v: [f64; 2]) -> Self {
        Span { from: v[0], to: v[1] }
    }
}

impl From<Span> for [f64; 2] {
    fn from(s: Span) -> Self {
        [s.from, s.to]
    }
}

/// Zero-sequence mutual between two branches over the given spans. The
/// coupled portions map linearly onto each other, from-end to from-end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutualCoupling {
    pub branch_a: String,
    pub branch_b: String,
    /// Total mutual over the coupled length, pu.
    pub z0m: Complex64,
    pub span_a: Span,
    pub span_b: Span,
}

impl MutualCoupling {
    pub fn name(&self) -> String {
        format!("{}~{}", self.branch_a, self.branch_b)
    }

    pub fn touches(&self, branch: &str) -> bool {
        self.branch_a == branch || self.branch_b == branch
    }

    pub fn partner_of(&self, branch: &str) -> Option<&str> {
        if self.branch_a == branch {
            Some(&self.branch_b)
        } else if self.branch_b == branch {
            Some(&self.branch_a)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    From,
    To,
}

/// Measurement location: a branch terminal with CT polarity (+1 means
/// positive current flows from the bus into the line).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayPoint {
    pub branch: String,
    pub terminal: Terminal,
    #[serde(default = "plus_one")]
    pub orientation: f64,
}

fn plus_one() -> f64 {
    1.0
}

impl RelayPoint {
    pub fn new(branch: impl Into<String>, terminal: Terminal) -> Self {
        Self {
            branch: branch.into(),
            terminal,
            orientation: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotLink {
    #[serde(flatten)]
    pub config: PilotConfig,
    /// Relay at the other terminal of the protected line.
    pub remote: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relay {
    pub id: String,
    pub point: RelayPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goc: Option<GocSetting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<DistanceSetting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot: Option<PilotLink>,
    #[serde(default)]
    pub direction: DirectionSettings,
}

/// Default study targets for the CLI.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyDefaults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitored_branch: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primary_relay: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backup_relay: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reach_relay: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot_relay: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Network {
    pub format_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub base_mva: f64,
    pub frequency_hz: f64,
    pub buses: Vec<Bus>,
    pub sources: Vec<Source>,
    pub branches: Vec<Branch>,
    pub couplings: Vec<MutualCoupling>,
    pub relays: Vec<Relay>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyDefaults>,
}

impl Network {
    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn branch(&self, id: &str) -> Option<&Branch> {
        self.branches.iter().find(|b| b.id == id)
    }

    pub fn branch_index(&self, id: &str) -> Option<usize> {
        self.branches.iter().position(|b| b.id == id)
    }

    pub fn relay(&self, id: &str) -> Option<&Relay> {
        self.relays.iter().find(|r| r.id == id)
    }

    /// Branches sharing at least one coupling record with `branch`.
    pub fn coupled_partners(&self, branch: &str) -> Vec<String> {
        let mut out: Vec<String> = self
            .couplings
            .iter()
            .filter_map(|c| c.partner_of(branch).map(str::to_string))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Copy with every coupling record removed.
    pub fn without_couplings(&self) -> Network {
        Network {
            couplings: Vec::new(),
            ..self.clone()
        }
    }

    pub fn with_status(&self, branch: &str, status: BranchStatus) -> Network {
        let mut n = self.clone();
        for b in &mut n.branches {
            if b.id == branch {
                b.status = status;
            }
        }
        n
    }

    /// SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        hex_digest(to_json(self).as_bytes())
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
