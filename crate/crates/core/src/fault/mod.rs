//! Sequence-network fault solution with zero-sequence mutual coupling.

mod decompose;
mod placement;
mod solve;
mod systems;

pub use decompose::{decompose_3i0, Decomposition, Polarity};
pub use placement::{place_intermediate_fault, Placement};
pub use solve::solve_fault;
pub use systems::{build_sequence_systems, BranchGroup, Factored, SequenceNetwork, SequenceSystems};

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::network::{RelayPoint, Terminal};
use crate::seq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultKind {
    /// Phase a to ground.
    #[serde(rename = "SLG")]
    Slg,
    /// Phases b and c to ground.
    #[serde(rename = "LLG")]
    Llg,
    /// Phase b to phase c.
    #[serde(rename = "LL")]
    Ll,
    #[serde(rename = "THREE_PHASE")]
    ThreePhase,
}

impl FaultKind {
    pub fn involves_ground(&self) -> bool {
        matches!(self, FaultKind::Slg | FaultKind::Llg)
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaultKind::Slg => "SLG",
            FaultKind::Llg => "LLG",
            FaultKind::Ll => "LL",
            FaultKind::ThreePhase => "THREE_PHASE",
        })
    }
}

impl std::str::FromStr for FaultKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SLG" => Ok(FaultKind::Slg),
            "LLG" => Ok(FaultKind::Llg),
            "LL" => Ok(FaultKind::Ll),
            "3PH" | "THREE_PHASE" => Ok(FaultKind::ThreePhase),
            other => Err(format!("unknown fault kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultLocation {
    Bus(String),
    /// Position along a branch, as a fraction of its length from the from-bus.
    Branch { branch: String, fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub kind: FaultKind,
    pub location: FaultLocation,
    /// Fault resistance, pu.
    pub fault_resistance: f64,
    pub mutual_coupling: bool,
}

impl FaultSpec {
    pub fn at_bus(kind: FaultKind, bus: impl Into<String>) -> Self {
        Self {
            kind,
            location: FaultLocation::Bus(bus.into()),
            fault_resistance: 0.0,
            mutual_coupling: true,
        }
    }

    pub fn on_branch(kind: FaultKind, branch: impl Into<String>, fraction: f64) -> Self {
        Self {
            kind,
            location: FaultLocation::Branch {
                branch: branch.into(),
                fraction,
            },
            fault_resistance: 0.0,
            mutual_coupling: true,
        }
    }

    pub fn with_resistance(mut self, rf: f64) -> Self {
        self.fault_resistance = rf;
        self
    }

    pub fn with_coupling(mut self, enabled: bool) -> Self {
        self.mutual_coupling = enabled;
        self
    }
}

/// Sequence phasors (`[0, 1, 2]`) at a branch terminal. Current is positive
/// flowing from the bus into the line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointPhasors {
    pub branch: String,
    pub terminal: Terminal,
    pub current: [Complex64; 3],
    pub voltage: [Complex64; 3],
}

impl PointPhasors {
    pub fn residual(&self) -> Complex64 {
        self.current[0] * 3.0
    }

    pub fn phase_currents(&self) -> [Complex64; 3] {
        seq::to_phase(self.current)
    }

    pub fn phase_voltages(&self) -> [Complex64; 3] {
        seq::to_phase(self.voltage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BusPhasors {
    pub bus: String,
    pub voltage: [Complex64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPhasors {
    pub branch: String,
    /// From-bus to to-bus.
    pub current: [Complex64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaultSolution {
    pub kind: FaultKind,
    pub fault_bus: String,
    pub mutual_coupling: bool,
    /// Sequence currents flowing from the network into the fault.
    pub fault_current: [Complex64; 3],
    pub bus_voltages: Vec<BusPhasors>,
    /// Branch currents after fault placement (split branches appear as their halves).
    pub branch_currents: Vec<BranchPhasors>,
    /// Both terminals of every branch of the original network.
    pub points: Vec<PointPhasors>,
}

impl FaultSolution {
    pub fn point(&self, branch: &str, terminal: Terminal) -> Option<&PointPhasors> {
        self.points
            .iter()
            .find(|p| p.branch == branch && p.terminal == terminal)
    }

    /// Phasors at `relay` with its CT orientation applied.
    pub fn measure(&self, relay: &RelayPoint) -> Option<PointPhasors> {
        self.point(&relay.branch, relay.terminal).map(|p| PointPhasors {
            current: p.current.map(|i| i * relay.orientation),
            ..p.clone()
        })
    }

    pub fn fault_current_abc(&self) -> [Complex64; 3] {
        seq::to_phase(self.fault_current)
    }

    /// Current into ground (3I0) for ground faults, phase-b current otherwise.
    pub fn total_fault_current(&self) -> Complex64 {
        if self.kind.involves_ground() {
            self.fault_current[0] * 3.0
        } else {
            self.fault_current_abc()[1]
        }
    }

    pub fn bus_voltage(&self, bus: &str) -> Option<[Complex64; 3]> {
        self.bus_voltages
            .iter()
            .find(|b| b.bus == bus)
            .map(|b| b.voltage)
    }

    pub fn branch_current(&self, branch: &str) -> Option<[Complex64; 3]> {
        self.branch_currents
            .iter()
            .find(|b| b.branch == branch)
            .map(|b| b.current)
    }
}
