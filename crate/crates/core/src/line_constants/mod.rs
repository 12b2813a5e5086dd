//! Line constants: Carson impedances, ground-wire elimination and the
//! sequence-domain image of multi-circuit towers.

mod carson;
mod geometry;
mod sequence;

pub use carson::{carson_matrix, earth_constant, kron_reduce, transpose_average, PhaseImpedanceMatrix};
pub use geometry::{
    Circuit, Conductor, ConductorRole, ConductorSpec, EarthModel, GeometryFile, TowerGeometry,
};
pub use sequence::{
    coupling_vs_separation, to_sequence, CircuitSequence, MutualSequence, SequenceImpedanceSet,
};

use serde::Serialize;

use crate::error::Result;

/// Earth-return resistance coefficient, Ω/km per Hz.
pub const EARTH_RESISTANCE_PER_HZ: f64 = 0.0009865;
/// Reactance coefficient, Ω/km per Hz.
pub const REACTANCE_PER_HZ: f64 = 0.0012562;
/// Equivalent earth-return depth coefficient: `De = 658.87·sqrt(ρ/f)` meters.
pub const EARTH_DEPTH_COEFF: f64 = 658.87;

/// Complete line-constants result for one geometry.
#[derive(Debug, Clone, Serialize)]
pub struct LineConstants {
    /// Conductor labels in the order of `primitive`.
    pub conductors: Vec<String>,
    /// Carson matrix over every conductor, ground wires included.
    pub primitive: PhaseImpedanceMatrix,
    /// Phase labels in the order of `phase`: circuits in file order, a-b-c.
    pub phases: Vec<String>,
    /// Phase matrix after ground-wire elimination (and transposition, if asked).
    pub phase: PhaseImpedanceMatrix,
    pub sequence: SequenceImpedanceSet,
    pub transposed: bool,
}

impl LineConstants {
    pub fn compute(geometry: &TowerGeometry, earth: &EarthModel, transposed: bool) -> Result<Self> {
        let primitive = carson_matrix(geometry, earth)?;

        // Reorder so circuit phases come first, ground wires last.
        let mut order = Vec::with_capacity(geometry.conductors.len());
        for circuit in &geometry.circuits {
            for label in &circuit.phases {
                order.push(geometry.index_of(label).expect("validated geometry"));
            }
        }
        let n_phase = order.len();
        order.extend(
            geometry
                .conductors
                .iter()
                .enumerate()
                .filter(|(_, c)| c.role == ConductorRole::GroundWire)
                .map(|(i, _)| i),
        );
        let permuted = primitive.permuted(&order);
        let ground: Vec<usize> = (n_phase..order.len()).collect();
        let mut phase = kron_reduce(&permuted, &ground)?;
        if transposed {
            phase = transpose_average(&phase)?;
        }
        let names: Vec<String> = geometry.circuits.iter().map(|c| c.name.clone()).collect();
        let sequence = to_sequence(&phase, &names)?;

        Ok(Self {
            conductors: geometry.conductors.iter().map(|c| c.label.clone()).collect(),
            primitive,
            phases: order[..n_phase]
                .iter()
                .map(|&i| geometry.conductors[i].label.clone())
                .collect(),
            phase,
            sequence,
            transposed,
        })
    }
}
