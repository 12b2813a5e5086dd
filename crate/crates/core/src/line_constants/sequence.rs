use num_complex::Complex64;
use serde::Serialize;

use super::carson::{carson_matrix, kron_reduce, PhaseImpedanceMatrix};
use super::geometry::{ConductorRole, EarthModel, TowerGeometry};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::seq;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitSequence {
    pub name: String,
    pub z0: Complex64,
    pub z1: Complex64,
    pub z2: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutualSequence {
    pub a: String,
    pub b: String,
    pub z0m: Complex64,
}

/// Sequence-domain image of a multi-circuit phase matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceImpedanceSet {
    pub circuits: Vec<CircuitSequence>,
    pub mutuals: Vec<MutualSequence>,
    /// Full `T⁻¹·Z·T` with `T = diag(A, A, …)`; components ordered 0, 1, 2
    /// within each circuit block.
    #[serde(skip)]
    pub full: CMatrix,
}

impl SequenceImpedanceSet {
    pub fn circuit(&self, name: &str) -> Option<&CircuitSequence> {
        self.circuits.iter().find(|c| c.name == name)
    }

    pub fn z0m(&self, a: &str, b: &str) -> Option<Complex64> {
        self.mutuals
            .iter()
            .find(|m| (m.a == a && m.b == b) || (m.a == b && m.b == a))
            .map(|m| m.z0m)
    }

    /// `T·Zseq·T⁻¹`, the phase matrix this set was derived from.
    pub fn to_phase(&self) -> CMatrix {
        let (t, t_inv) = block_transforms(self.full.nrows() / 3);
        t * &self.full * t_inv
    }
}

fn block_transforms(n_circuits: usize) -> (CMatrix, CMatrix) {
    let n = 3 * n_circuits;
    let a = seq::a_matrix();
    let a_inv = seq::a_inv_matrix();
    let mut t = CMatrix::zeros(n, n);
    let mut t_inv = CMatrix::zeros(n, n);
    for c in 0..n_circuits {
        for i in 0..3 {
            for k in 0..3 {
                t[(3 * c + i, 3 * c + k)] = a[(i, k)];
                t_inv[(3 * c + i, 3 * c + k)] = a_inv[(i, k)];
            }
        }
    }
    (t, t_inv)
}

/// `Zseq = A⁻¹·Zabc·A` applied block-wise. `circuits` names the consecutive
/// 3×3 phase blocks of `z`.
pub fn to_sequence(z: &PhaseImpedanceMatrix, circuits: &[String]) -> Result<SequenceImpedanceSet> {
    let n = z.order();
    if n == 0 || n % 3 != 0 {
        return Err(Error::Shape(format!(
            "phase matrix order {n} is not a multiple of 3"
        )));
    }
    if circuits.len() != n / 3 {
        return Err(Error::Shape(format!(
            "{} circuit names for an order-{n} matrix",
            circuits.len()
        )));
    }
    let (t, t_inv) = block_transforms(n / 3);
    let full = t_inv * z.entries() * t;

    let circuit_seq = circuits
        .iter()
        .enumerate()
        .map(|(c, name)| CircuitSequence {
            name: name.clone(),
            z0: full[(3 * c, 3 * c)],
            z1: full[(3 * c + 1, 3 * c + 1)],
            z2: full[(3 * c + 2, 3 * c + 2)],
        })
        .collect();
    let mut mutuals = Vec::new();
    for i in 0..circuits.len() {
        for k in i + 1..circuits.len() {
            mutuals.push(MutualSequence {
                a: circuits[i].clone(),
                b: circuits[k].clone(),
                z0m: full[(3 * i, 3 * k)],
            });
        }
    }
    Ok(SequenceImpedanceSet {
        circuits: circuit_seq,
        mutuals,
        full,
    })
}

/// Zero-sequence mutual between the first circuit of `left` and the first
/// circuit of `right` with `right` moved `separation` meters horizontally.
/// Ground wires of both structures are eliminated.
pub fn coupling_vs_separation(
    left: &TowerGeometry,
    right: &TowerGeometry,
    separations: &[f64],
    earth: &EarthModel,
) -> Result<Vec<(f64, Complex64)>> {
    if separations.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::Parameter("separations must be positive".into()));
    }
    if separations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("separations must be strictly increasing".into()));
    }
    separations
        .iter()
        .map(|&s| {
            let combined = pair_only(left, &right.shifted(s))?;
            Ok((s, pair_z0m(&combined, earth)?))
        })
        .collect()
}

/// Ground wires of both structures plus the phases of each first circuit.
fn pair_only(left: &TowerGeometry, right: &TowerGeometry) -> Result<TowerGeometry> {
    let keep = |g: &TowerGeometry| {
        let used = &g.circuits[0].phases;
        g.conductors
            .iter()
            .filter(|c| c.role == ConductorRole::GroundWire || used.contains(&c.label))
            .cloned()
            .collect::<Vec<_>>()
    };
    // the right structure is usually a shifted copy of the left one
    let tag = |l: &str| format!("{l}'");
    let mut conductors = keep(left);
    conductors.extend(keep(right).into_iter().map(|mut c| {
        c.label = tag(&c.label);
        c
    }));
    let mut far = right.circuits[0].clone();
    far.phases = far.phases.map(|l| tag(&l));
    if far.name == left.circuits[0].name {
        far.name = tag(&far.name);
    }
    TowerGeometry::new(conductors, vec![left.circuits[0].clone(), far])
}

fn pair_z0m(g: &TowerGeometry, earth: &EarthModel) -> Result<Complex64> {
    let z = carson_matrix(g, earth)?;
    let mut order = Vec::new();
    for c in &g.circuits {
        for l in &c.phases {
            order.push(g.index_of(l).expect("validated"));
        }
    }
    let n_phase = order.len();
    order.extend(
        g.conductors
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == ConductorRole::GroundWire)
            .map(|(i, _)| i),
    );
    let ground: Vec<usize> = (n_phase..order.len()).collect();
    let reduced = kron_reduce(&z.permuted(&order), &ground)?;
    let names: Vec<String> = g.circuits.iter().map(|c| c.name.clone()).collect();
    Ok(to_sequence(&reduced, &names)?.mutuals[0].z0m)
}
