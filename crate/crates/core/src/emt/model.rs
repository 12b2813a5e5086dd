use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fault::{FaultKind, Placement};
use crate::linalg::{c, CMatrix};
use crate::network::{BranchStatus, Network, Terminal};
use crate::seq;

/// Conductance used for an ideal (zero-resistance) fault path, pu.
pub const IDEAL_FAULT_CONDUCTANCE: f64 = 1e8;
/// Leakage to ground at every node so isolated islands stay solvable, pu.
pub const NODE_LEAKAGE: f64 = 1e-9;

/// One phase conductor of a branch or a source.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Branch { branch: String, phase: usize },
    Source { source: String, phase: usize },
}

/// Phase-domain series RL network. Element `k` carries current from
/// `ends[k].0` to `ends[k].1` (`None` is ground) and obeys
/// `L·di/dt + R·i = v_from − v_to + e`.
#[derive(Debug, Clone)]
pub struct RlNetwork {
    pub frequency_hz: f64,
    pub node_names: Vec<String>,
    pub elements: Vec<ElementKind>,
    pub ends: Vec<(Option<usize>, Option<usize>)>,
    pub r: DMatrix<f64>,
    pub l: DMatrix<f64>,
    /// Series EMF phasors (peak convention: `e(t) = Re(E·e^{jωt})`).
    pub emf: Vec<Complex64>,
    /// Nodes of the fault bus, phases a, b, c.
    pub fault_nodes: [usize; 3],
}

impl RlNetwork {
    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency_hz
    }

    pub fn incidence(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.elements.len(), self.node_names.len());
        for (k, &(f, t)) in self.ends.iter().enumerate() {
            if let Some(f) = f {
                a[(k, f)] += 1.0;
            }
            if let Some(t) = t {
                a[(k, t)] -= 1.0;
            }
        }
        a
    }

    pub fn emf_at(&self, t: f64) -> DVector<f64> {
        let rot = Complex64::from_polar(1.0, self.omega() * t);
        DVector::from_iterator(self.emf.len(), self.emf.iter().map(|e| (e * rot).re))
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.node_names.iter().position(|n| n == name)
    }

    pub fn element_index(&self, kind: &ElementKind) -> Option<usize> {
        self.elements.iter().position(|e| e == kind)
    }
}

fn phase_matrix(z0: Complex64, z1: Complex64) -> CMatrix {
    let m = seq::balanced_phase_matrix(z0, z1);
    CMatrix::from_fn(3, 3, |i, k| m[(i, k)])
}

/// Lumped RL model of a placed network. Open branches carry no current and
/// are left out; grounded out-of-service branches keep both ends at ground.
pub fn build_rl_network(p: &Placement, mutual_coupling: bool) -> Result<RlNetwork> {
    let n: &Network = &p.network;
    let omega = 2.0 * std::f64::consts::PI * n.frequency_hz;
    let mut node_names = Vec::new();
    for b in &n.buses {
        for ph in ["a", "b", "c"] {
            node_names.push(format!("{}.{ph}", b.id));
        }
    }
    let bus_node = |id: &str, ph: usize| n.bus_index(id).map(|i| 3 * i + ph);

    let mut elements = Vec::new();
    let mut ends = Vec::new();
    let mut blocks: Vec<(usize, CMatrix)> = Vec::new();
    let mut branch_start = std::collections::HashMap::new();
    for br in &n.branches {
        let (f, t) = match br.status {
            BranchStatus::InService => (true, true),
            BranchStatus::OutOfServiceGrounded => (false, false),
            BranchStatus::OpenAtFrom | BranchStatus::OpenAtTo => continue,
        };
        branch_start.insert(br.id.clone(), elements.len());
        blocks.push((elements.len(), phase_matrix(br.z0, br.z1)));
        for ph in 0..3 {
            elements.push(ElementKind::Branch {
                branch: br.id.clone(),
                phase: ph,
            });
            ends.push((
                if f { bus_node(&br.from_bus, ph) } else { None },
                if t { bus_node(&br.to_bus, ph) } else { None },
            ));
        }
    }
    let mut emf = vec![c(0.0, 0.0); elements.len()];
    let a = seq::a();
    for s in &n.sources {
        blocks.push((elements.len(), phase_matrix(s.z0, s.z1)));
        let e = [s.emf, s.emf * a * a, s.emf * a];
        for ph in 0..3 {
            elements.push(ElementKind::Source {
                source: s.id.clone(),
                phase: ph,
            });
            // ground to bus, EMF drives current into the bus
            ends.push((None, bus_node(&s.bus, ph)));
            emf.push(e[ph]);
        }
    }

    let ne = elements.len();
    let mut z = CMatrix::zeros(ne, ne);
    for (start, blk) in &blocks {
        for i in 0..3 {
            for k in 0..3 {
                z[(start + i, start + k)] = blk[(i, k)];
            }
        }
    }
    if mutual_coupling {
        for cpl in &n.couplings {
            let (Some(&sa), Some(&sb)) = (branch_start.get(&cpl.branch_a), branch_start.get(&cpl.branch_b)) else {
                continue;
            };
            let m = cpl.z0m / 3.0;
            for i in 0..3 {
                for k in 0..3 {
                    z[(sa + i, sb + k)] += m;
                    z[(sb + k, sa + i)] += m;
                }
            }
        }
    }
    let r = DMatrix::from_fn(ne, ne, |i, k| z[(i, k)].re);
    let l = DMatrix::from_fn(ne, ne, |i, k| z[(i, k)].im / omega);
    if l.clone().cholesky().is_none() {
        return Err(Error::InfeasibleCoupling {
            record: n.couplings.iter().map(|c| c.name()).collect::<Vec<_>>().join(","),
            detail: "phase-domain inductance matrix is not positive definite".into(),
        });
    }

    let fb = n.bus_index(&p.fault_bus).ok_or_else(|| Error::Unknown {
        kind: "bus",
        id: p.fault_bus.clone(),
    })?;
    Ok(RlNetwork {
        frequency_hz: n.frequency_hz,
        node_names,
        elements,
        ends,
        r,
        l,
        emf,
        fault_nodes: [3 * fb, 3 * fb + 1, 3 * fb + 2],
    })
}

/// Fault path conductance stamps. LLG adds one internal neutral node, so
/// the returned matrix may be one larger than the network node count.
pub fn fault_conductance(net: &RlNetwork, kind: FaultKind, rf: f64) -> DMatrix<f64> {
    let nn = net.node_names.len();
    let extra = usize::from(kind == FaultKind::Llg);
    let mut g = DMatrix::zeros(nn + extra, nn + extra);
    let gf = if rf > 0.0 { 1.0 / rf } else { IDEAL_FAULT_CONDUCTANCE };
    let [a, b, cc] = net.fault_nodes;
    let mut stamp = |p: usize, q: Option<usize>, y: f64| {
        g[(p, p)] += y;
        if let Some(q) = q {
            g[(q, q)] += y;
            g[(p, q)] -= y;
            g[(q, p)] -= y;
        }
    };
    match kind {
        FaultKind::Slg => stamp(a, None, gf),
        FaultKind::Ll => stamp(b, Some(cc), gf),
        FaultKind::Llg => {
            let nt = nn;
            stamp(b, Some(nt), IDEAL_FAULT_CONDUCTANCE);
            stamp(cc, Some(nt), IDEAL_FAULT_CONDUCTANCE);
            stamp(nt, None, gf);
        }
        FaultKind::ThreePhase => {
            for p in [a, b, cc] {
                stamp(p, None, gf);
            }
        }
    }
    g
}

/// Element index carrying the given original-branch terminal, with the
/// sign turning element current into current flowing from the bus into the
/// line.
pub fn terminal_element(
    net: &RlNetwork,
    p: &Placement,
    branch: &str,
    terminal: Terminal,
    phase: usize,
) -> Option<(usize, f64)> {
    let post = p.resolve(branch, terminal);
    let k = net.element_index(&ElementKind::Branch {
        branch: post,
        phase,
    })?;
    let sign = match terminal {
        Terminal::From => 1.0,
        Terminal::To => -1.0,
    };
    Some((k, sign))
}
