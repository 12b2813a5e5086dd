//! JSON network file.
//!
//! Impedances are `[re, im]` pairs in per unit. Branch `z1`/`z0` and coupling
//! `z0m` may instead be written as `{"ohm_per_km": [re, im]}`; those are
//! converted with the from-bus kV and `base_mva` at load time, so the
//! serialized form is always per unit.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use super::{
    validate, Branch, BranchStatus, Bus, MutualCoupling, Network, Relay, Rule, Source, Span,
    StudyDefaults,
};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum ImpedanceInput {
    PerUnit(Complex64),
    Ohmic(OhmPerKm),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct OhmPerKm {
    ohm_per_km: Complex64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBranch {
    id: String,
    from_bus: String,
    to_bus: String,
    z1: ImpedanceInput,
    z0: ImpedanceInput,
    length_km: f64,
    #[serde(default)]
    status: BranchStatus,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    branch_a: String,
    branch_b: String,
    z0m: ImpedanceInput,
    #[serde(default = "full")]
    span_a: Span,
    #[serde(default = "full")]
    span_b: Span,
}

fn full() -> Span {
    Span::FULL
}

fn default_frequency() -> f64 {
    60.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    format_version: u32,
    #[serde(default)]
    name: Option<String>,
    base_mva: f64,
    #[serde(default = "default_frequency")]
    frequency_hz: f64,
    buses: Vec<Bus>,
    sources: Vec<Source>,
    branches: Vec<RawBranch>,
    #[serde(default)]
    couplings: Vec<RawCoupling>,
    #[serde(default)]
    relays: Vec<Relay>,
    #[serde(default)]
    study: Option<StudyDefaults>,
}

/// `Ω/km × km` to per unit on `kV²/MVA`.
pub fn ohms_to_pu(z_ohm_per_km: Complex64, length_km: f64, kv: f64, base_mva: f64) -> Complex64 {
    z_ohm_per_km * length_km / (kv * kv / base_mva)
}

pub fn load_network(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_network(&text).map_err(|e| match e {
        Error::Parse {
            line,
            column,
            message,
            ..
        } => Error::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message,
        },
        other => other,
    })
}

/// Parse, cross-reference and validate a network document.
pub fn parse_network(text: &str) -> Result<Network> {
    let raw: RawNetwork = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: "<network>".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.format_version != FORMAT_VERSION {
        return Err(Error::Parse {
            path: "<network>".into(),
            line: 0,
            column: 0,
            message: format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                raw.format_version
            ),
        });
    }

    let kv_of = |bus: &str| -> Result<f64> {
        raw.buses
            .iter()
            .find(|b| b.id == bus)
            .map(|b| b.kv)
            .ok_or_else(|| Error::DanglingReference {
                kind: "bus",
                id: bus.to_string(),
            })
    };
    let to_pu = |z: ImpedanceInput, km: f64, kv: f64| match z {
        ImpedanceInput::PerUnit(z) => z,
        ImpedanceInput::Ohmic(o) => ohms_to_pu(o.ohm_per_km, km, kv, raw.base_mva),
    };

    let mut branches = Vec::with_capacity(raw.branches.len());
    for b in &raw.branches {
        let kv = kv_of(&b.from_bus)?;
        kv_of(&b.to_bus)?;
        branches.push(Branch {
            id: b.id.clone(),
            from_bus: b.from_bus.clone(),
            to_bus: b.to_bus.clone(),
            z1: to_pu(b.z1, b.length_km, kv),
            z0: to_pu(b.z0, b.length_km, kv),
            length_km: b.length_km,
            status: b.status,
        });
    }

    let mut couplings = Vec::with_capacity(raw.couplings.len());
    for c in &raw.couplings {
        let z0m = match c.z0m {
            ImpedanceInput::PerUnit(z) => z,
            ImpedanceInput::Ohmic(o) => {
                let find = |id: &str| {
                    branches
                        .iter()
                        .find(|b| b.id == id)
                        .ok_or_else(|| Error::DanglingReference {
                            kind: "branch",
                            id: id.to_string(),
                        })
                };
                let a = find(&c.branch_a)?;
                let b = find(&c.branch_b)?;
                let km = a.length_km * c.span_a.len();
                // mixed-voltage pairs use the geometric mean base impedance
                let z_base = kv_of(&a.from_bus)? * kv_of(&b.from_bus)? / raw.base_mva;
                o.ohm_per_km * km / z_base
            }
        };
        couplings.push(MutualCoupling {
            branch_a: c.branch_a.clone(),
            branch_b: c.branch_b.clone(),
            z0m,
            span_a: c.span_a,
            span_b: c.span_b,
        });
    }

    let network = Network {
        format_version: raw.format_version,
        name: raw.name,
        base_mva: raw.base_mva,
        frequency_hz: raw.frequency_hz,
        buses: raw.buses,
        sources: raw.sources,
        branches,
        couplings,
        relays: raw.relays,
        study: raw.study,
    };

    let violations = validate(&network);
    if let Some(v) = violations.iter().find(|v| v.rule == Rule::DanglingReference) {
        return Err(Error::DanglingReference {
            kind: v.kind,
            id: v.detail.clone(),
        });
    }
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    Ok(network)
}

/// Canonical pretty JSON form (always per unit).
pub fn to_json(n: &Network) -> String {
    serde_json::to_string_pretty(n).expect("network serializes")
}
