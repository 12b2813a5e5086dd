use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EARTH_DEPTH_COEFF;
use crate::error::{Error, Result};

/// Physical conductor data. Resistance in Ω/km, lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConductorSpec {
    pub ac_resistance: f64,
    pub gmr: f64,
    pub outer_radius: f64,
    #[serde(default = "one")]
    pub bundle_count: u32,
    #[serde(default)]
    pub bundle_spacing: f64,
}

fn one() -> u32 {
    1
}

impl ConductorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Parameter(format!("conductor spec: {what}")));
        if !(self.ac_resistance > 0.0 && self.ac_resistance.is_finite()) {
            return bad("ac_resistance must be > 0");
        }
        if !(self.gmr > 0.0 && self.gmr.is_finite()) {
            return bad("gmr must be > 0");
        }
        if !(self.outer_radius > 0.0 && self.outer_radius.is_finite()) {
            return bad("outer_radius must be > 0");
        }
        if self.bundle_count == 0 {
            return bad("bundle_count must be >= 1");
        }
        if self.bundle_count > 1 && !(self.bundle_spacing > 0.0) {
            return bad("bundle_spacing must be > 0 for bundled conductors");
        }
        Ok(())
    }

    /// Radius of the circle the sub-conductors sit on (regular n-gon of side `bundle_spacing`).
    fn bundle_circle_radius(&self) -> f64 {
        let n = self.bundle_count as f64;
        self.bundle_spacing / (2.0 * (PI / n).sin())
    }

    /// `(n · r · R^(n−1))^(1/n)`, the usual regular-bundle reduction.
    fn bundle_equivalent(&self, r: f64) -> f64 {
        if self.bundle_count == 1 {
            return r;
        }
        let n = self.bundle_count as f64;
        (n * r * self.bundle_circle_radius().powf(n - 1.0)).powf(1.0 / n)
    }

    pub fn equivalent_gmr(&self) -> f64 {
        self.bundle_equivalent(self.gmr)
    }

    pub fn equivalent_radius(&self) -> f64 {
        self.bundle_equivalent(self.outer_radius)
    }

    /// Sub-conductors carry equal shares of the current.
    pub fn equivalent_resistance(&self) -> f64 {
        self.ac_resistance / self.bundle_count as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConductorRole {
    Phase,
    GroundWire,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conductor {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub spec: ConductorSpec,
    pub role: ConductorRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circuit {
    pub name: String,
    /// Conductor labels for phases a, b, c.
    pub phases: [String; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TowerGeometry {
    pub conductors: Vec<Conductor>,
    pub circuits: Vec<Circuit>,
}

impl TowerGeometry {
    pub fn new(conductors: Vec<Conductor>, circuits: Vec<Circuit>) -> Result<Self> {
        let g = Self {
            conductors,
            circuits,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.conductors.iter().position(|c| c.label == label)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Geometry(m));
        if self.conductors.is_empty() {
            return err("no conductors".into());
        }
        let mut seen = HashMap::new();
        for (i, c) in self.conductors.iter().enumerate() {
            c.spec
                .validate()
                .map_err(|e| Error::Geometry(format!("conductor `{}`: {e}", c.label)))?;
            if !(c.y > 0.0) || !c.x.is_finite() || !c.y.is_finite() {
                return err(format!("conductor `{}` must sit above earth (y > 0)", c.label));
            }
            if seen.insert(c.label.as_str(), i).is_some() {
                return err(format!("duplicate conductor label `{}`", c.label));
            }
        }
        for (i, a) in self.conductors.iter().enumerate() {
            for b in &self.conductors[i + 1..] {
                if a.x == b.x && a.y == b.y {
                    return err(format!(
                        "conductors `{}` and `{}` are coincident",
                        a.label, b.label
                    ));
                }
            }
        }
        if self.circuits.is_empty() {
            return err("no circuits".into());
        }
        let mut assigned = vec![false; self.conductors.len()];
        for circuit in &self.circuits {
            for (k, label) in circuit.phases.iter().enumerate() {
                let Some(&idx) = seen.get(label.as_str()) else {
                    return err(format!(
                        "circuit `{}` names unknown conductor `{label}`",
                        circuit.name
                    ));
                };
                if circuit.phases[..k].contains(label) {
                    return err(format!(
                        "circuit `{}` repeats conductor `{label}`",
                        circuit.name
                    ));
                }
                if self.conductors[idx].role != ConductorRole::Phase {
                    return err(format!(
                        "circuit `{}` uses ground wire `{label}` as a phase",
                        circuit.name
                    ));
                }
                if assigned[idx] {
                    return err(format!("conductor `{label}` belongs to two circuits"));
                }
                assigned[idx] = true;
            }
        }
        for (c, used) in self.conductors.iter().zip(&assigned) {
            if c.role == ConductorRole::Phase && !used {
                return err(format!("phase conductor `{}` is not in any circuit", c.label));
            }
        }
        Ok(())
    }

    /// Copy with every conductor shifted horizontally by `dx` meters.
    pub fn shifted(&self, dx: f64) -> Self {
        let mut g = self.clone();
        for c in &mut g.conductors {
            c.x += dx;
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarthModel {
    /// Ω·m
    pub resistivity: f64,
    /// Hz
    pub frequency: f64,
}

impl Default for EarthModel {
    fn default() -> Self {
        Self {
            resistivity: 100.0,
            frequency: 60.0,
        }
    }
}

impl EarthModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.resistivity > 0.0 && self.resistivity.is_finite()) {
            return Err(Error::Parameter(format!(
                "earth resistivity must be > 0, got {}",
                self.resistivity
            )));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::Parameter(format!(
                "frequency must be > 0, got {}",
                self.frequency
            )));
        }
        Ok(())
    }

    /// Equivalent earth-return depth in meters.
    pub fn return_depth(&self) -> f64 {
        EARTH_DEPTH_COEFF * (self.resistivity / self.frequency).sqrt()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConductor {
    label: String,
    x: f64,
    y: f64,
    #[serde(rename = "type")]
    kind: String,
    role: ConductorRole,
}

/// On-disk geometry description (JSON).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    #[serde(default)]
    earth: EarthModel,
    #[serde(default)]
    transposed: bool,
    conductor_types: HashMap<String, ConductorSpec>,
    conductors: Vec<RawConductor>,
    circuits: Vec<Circuit>,
}

#[derive(Debug, Clone)]
pub struct GeometryFile {
    pub geometry: TowerGeometry,
    pub earth: EarthModel,
    pub transposed: bool,
}

impl GeometryFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
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

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawGeometry = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: "<geometry>".into(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut conductors = Vec::with_capacity(raw.conductors.len());
        for c in raw.conductors {
            let spec = *raw.conductor_types.get(&c.kind).ok_or(Error::DanglingReference {
                kind: "conductor type",
                id: c.kind.clone(),
            })?;
            conductors.push(Conductor {
                label: c.label,
                x: c.x,
                y: c.y,
                spec,
                role: c.role,
            });
        }
        raw.earth.validate()?;
        Ok(Self {
            geometry: TowerGeometry::new(conductors, raw.circuits)?,
            earth: raw.earth,
            transposed: raw.transposed,
        })
    }
}
