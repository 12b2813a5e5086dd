use num_complex::Complex64;

use super::placement::{place_intermediate_fault, Placement};
use super::systems::build_sequence_systems;
use super::{BranchPhasors, BusPhasors, FaultKind, FaultLocation, FaultSolution, FaultSpec, PointPhasors};
use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::network::{Network, Terminal};

pub(crate) fn place(n: &Network, loc: &FaultLocation) -> Result<Placement> {
    match loc {
        FaultLocation::Bus(b) => {
            if n.bus_index(b).is_none() {
                return Err(Error::Unknown {
                    kind: "bus",
                    id: b.clone(),
                });
            }
            Ok(Placement {
                network: n.clone(),
                fault_bus: b.clone(),
                split: None,
            })
        }
        FaultLocation::Branch { branch, fraction } => place_intermediate_fault(n, branch, *fraction),
    }
}

/// Sequence currents flowing out of the network into the fault, given the
/// driving-point impedances and the prefault voltage.
pub(crate) fn fault_currents(
    kind: FaultKind,
    z: [Complex64; 3],
    vf: Complex64,
    rf: f64,
) -> [Complex64; 3] {
    let [z0, z1, z2] = z;
    match kind {
        FaultKind::Slg => {
            let i = vf / (z0 + z1 + z2 + 3.0 * rf);
            [i, i, i]
        }
        FaultKind::Ll => {
            let i1 = vf / (z1 + z2 + rf);
            [ZERO, i1, -i1]
        }
        FaultKind::Llg => {
            let z0f = z0 + 3.0 * rf;
            let i1 = vf / (z1 + z2 * z0f / (z2 + z0f));
            [-i1 * z2 / (z2 + z0f), i1, -i1 * z0f / (z2 + z0f)]
        }
        FaultKind::ThreePhase => [ZERO, vf / (z1 + rf), ZERO],
    }
}

/// Sequence-network fault solution. Prefault conditions come from the
/// source EMFs with no load.
pub fn solve_fault(n: &Network, f: &FaultSpec) -> Result<FaultSolution> {
    if !(f.fault_resistance >= 0.0 && f.fault_resistance.is_finite()) {
        return Err(Error::Parameter(format!(
            "fault resistance {} must be finite and non-negative",
            f.fault_resistance
        )));
    }
    let placement = place(n, &f.location)?;
    let net = &placement.network;
    let sys = build_sequence_systems(net, f.mutual_coupling)?;
    let fb = net.bus_index(&placement.fault_bus).expect("placed bus exists");
    if !sys.active[fb] {
        return Err(Error::NoFaultCurrent(placement.fault_bus.clone()));
    }

    let nb = net.buses.len();
    let factored = sys
        .sequences
        .iter()
        .map(|s| s.factor(&sys.active))
        .collect::<Result<Vec<_>>>()?;
    let prefault = factored[1].solve(&sys.sequences[1].injection)?;
    let mut unit = vec![ZERO; nb];
    unit[fb] = Complex64::new(1.0, 0.0);
    let cols = factored
        .iter()
        .map(|fac| fac.solve(&unit))
        .collect::<Result<Vec<_>>>()?;
    let zf = [cols[0][fb], cols[1][fb], cols[2][fb]];
    let vf = prefault[fb];
    let i_f = fault_currents(f.kind, zf, vf, f.fault_resistance);

    let mut v: [Vec<Complex64>; 3] = Default::default();
    for s in 0..3 {
        v[s] = (0..nb)
            .map(|k| {
                let base = if s == 1 { prefault[k] } else { ZERO };
                base - cols[s][k] * i_f[s]
            })
            .collect();
    }
    let nbr = net.branches.len();
    let ib: Vec<Vec<Complex64>> = (0..3)
        .map(|s| sys.sequences[s].branch_currents(&v[s], nbr))
        .collect();

    let bus_voltages = net
        .buses
        .iter()
        .enumerate()
        .map(|(k, b)| BusPhasors {
            bus: b.id.clone(),
            voltage: [v[0][k], v[1][k], v[2][k]],
        })
        .collect();
    let branch_currents = net
        .branches
        .iter()
        .enumerate()
        .map(|(k, b)| BranchPhasors {
            branch: b.id.clone(),
            current: [ib[0][k], ib[1][k], ib[2][k]],
        })
        .collect();

    let mut points = Vec::with_capacity(2 * n.branches.len());
    for b in &n.branches {
        for terminal in [Terminal::From, Terminal::To] {
            let post = placement.resolve(&b.id, terminal);
            let k = net.branch_index(&post).expect("resolved branch exists");
            let (bus_id, sign) = match terminal {
                Terminal::From => (&b.from_bus, 1.0),
                Terminal::To => (&b.to_bus, -1.0),
            };
            let bi = net.bus_index(bus_id).expect("validated");
            points.push(PointPhasors {
                branch: b.id.clone(),
                terminal,
                current: [ib[0][k] * sign, ib[1][k] * sign, ib[2][k] * sign],
                voltage: [v[0][bi], v[1][bi], v[2][bi]],
            });
        }
    }

    Ok(FaultSolution {
        kind: f.kind,
        fault_bus: placement.fault_bus,
        mutual_coupling: f.mutual_coupling,
        fault_current: i_f,
        bus_voltages,
        branch_currents,
        points,
    })
}
