//! Sequence-domain solutions compared against the phase-domain oracle.

use super::{network, phase};
use mcstudy_core::fault::solve_fault;
use mcstudy_core::network::Terminal;
use mcstudy_core::{seq, Complex64, Error, FaultKind, FaultSpec};

pub const KINDS: [FaultKind; 4] = [FaultKind::Slg, FaultKind::Llg, FaultKind::Ll, FaultKind::ThreePhase];

/// Largest phase-domain mismatch relative to the largest oracle value, or
/// `None` when the fault draws no current.
pub fn compare(name: &str, spec: &FaultSpec) -> Option<f64> {
    let n = network(name);
    let s = match solve_fault(&n, spec) {
        Ok(s) => s,
        Err(Error::NoFaultCurrent(_)) => return None,
        Err(e) => panic!("{name} {spec:?}: {e}"),
    };
    let o = phase::solve(&n, spec);
    let mut scale = 0.0f64;
    let mut err = 0.0f64;
    let mut acc = |a: [Complex64; 3], b: [Complex64; 3]| {
        for k in 0..3 {
            scale = scale.max(b[k].norm());
            err = err.max((a[k] - b[k]).norm());
        }
    };
    for b in &n.buses {
        acc(seq::to_phase(s.bus_voltage(&b.id).unwrap()), o.bus_voltage[&b.id]);
    }
    for br in &n.branches {
        for t in [Terminal::From, Terminal::To] {
            acc(
                s.point(&br.id, t).unwrap().phase_currents(),
                o.terminal_current[&(br.id.clone(), t)],
            );
        }
    }
    acc(s.fault_current_abc(), o.fault_current);
    Some(err / scale)
}

/// Bus faults, branch faults at several positions, a resistive subset and
/// the same set with coupling off.
pub fn specs(name: &str) -> Vec<FaultSpec> {
    let n = network(name);
    let mut out = Vec::new();
    for kind in KINDS {
        for b in &n.buses {
            out.push(FaultSpec::at_bus(kind, &b.id));
        }
        for br in &n.branches {
            for m in [0.0, 0.05, 0.3, 0.5, 0.65, 0.95, 1.0] {
                out.push(FaultSpec::on_branch(kind, &br.id, m));
            }
        }
    }
    let with_rf: Vec<FaultSpec> = out.iter().step_by(3).map(|f| f.clone().with_resistance(0.02)).collect();
    out.extend(with_rf);
    let uncoupled: Vec<FaultSpec> = out.iter().map(|f| f.clone().with_coupling(false)).collect();
    out.extend(uncoupled);
    out
}

