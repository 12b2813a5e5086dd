use crate::error::{Error, Result};
use crate::network::{Branch, BranchStatus, Bus, MutualCoupling, Network, Span, Terminal};

/// A network with a fault bus available, plus how the original branch (if
/// any) was split.
#[derive(Debug, Clone)]
pub struct Placement {
    pub network: Network,
    pub fault_bus: String,
    /// `(original, from-side half, to-side half)`.
    pub split: Option<(String, String, String)>,
}

impl Placement {
    /// Post-placement branch that carries the given original terminal.
    pub fn new(n: &Network, loc: &crate::fault::FaultLocation) -> Result<Self> {
        super::solve::place(n, loc)
    }

    pub fn at_bus(n: &Network, bus: &str) -> Result<Self> {
        Self::new(n, &crate::fault::FaultLocation::Bus(bus.to_string()))
    }

    pub fn resolve(&self, branch: &str, terminal: Terminal) -> String {
        match &self.split {
            Some((orig, a, b)) if orig == branch => match terminal {
                Terminal::From => a.clone(),
                Terminal::To => b.clone(),
            },
            _ => branch.to_string(),
        }
    }
}

pub fn split_ids(branch: &str) -> (String, String, String) {
    (
        format!("{branch}#1"),
        format!("{branch}#2"),
        format!("{branch}@F"),
    )
}

/// Split `branch` at fraction `m` with a new fault bus between the halves.
///
/// Sequence impedances divide in proportion `m : 1−m`. Coupling records on the
/// branch are divided by overlapped length, assuming the mutual is spread
/// uniformly along the coupled span. `m = 0` and `m = 1` leave the network
/// untouched and use the terminal buses.
pub fn place_intermediate_fault(n: &Network, branch: &str, m: f64) -> Result<Placement> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::Parameter(format!(
            "fault position {m} outside [0, 1]"
        )));
    }
    let idx = n.branch_index(branch).ok_or_else(|| Error::Unknown {
        kind: "branch",
        id: branch.to_string(),
    })?;
    let orig = &n.branches[idx];
    if m == 0.0 || m == 1.0 {
        let bus = if m == 0.0 { &orig.from_bus } else { &orig.to_bus };
        return Ok(Placement {
            network: n.clone(),
            fault_bus: bus.clone(),
            split: None,
        });
    }

    let (id_a, id_b, bus_id) = split_ids(branch);
    if n.bus_index(&bus_id).is_some() || n.branch_index(&id_a).is_some() {
        return Err(Error::Parameter(format!(
            "synthetic ids for splitting `{branch}` already exist"
        )));
    }
    let kv = n.buses[n.bus_index(&orig.from_bus).expect("validated")].kv;

    let (status_a, status_b) = match orig.status {
        BranchStatus::InService => (BranchStatus::InService, BranchStatus::InService),
        BranchStatus::OutOfServiceGrounded => (
            BranchStatus::OutOfServiceGrounded,
            BranchStatus::OutOfServiceGrounded,
        ),
        BranchStatus::OpenAtFrom => (BranchStatus::OpenAtFrom, BranchStatus::InService),
        BranchStatus::OpenAtTo => (BranchStatus::InService, BranchStatus::OpenAtTo),
    };
    let half_a = Branch {
        id: id_a.clone(),
        from_bus: orig.from_bus.clone(),
        to_bus: bus_id.clone(),
        z1: orig.z1 * m,
        z0: orig.z0 * m,
        length_km: orig.length_km * m,
        status: status_a,
    };
    let half_b = Branch {
        id: id_b.clone(),
        from_bus: bus_id.clone(),
        to_bus: orig.to_bus.clone(),
        z1: orig.z1 * (1.0 - m),
        z0: orig.z0 * (1.0 - m),
        length_km: orig.length_km * (1.0 - m),
        status: status_b,
    };

    let mut out = n.clone();
    out.buses.push(Bus {
        id: bus_id.clone(),
        kv,
    });
    out.branches.splice(idx..=idx, [half_a, half_b]);

    let halves = [(id_a.as_str(), 0.0, m), (id_b.as_str(), m, 1.0)];
    out.couplings = n
        .couplings
        .iter()
        .flat_map(|c| split_record(c, branch, &halves))
        .collect();

    Ok(Placement {
        network: out,
        fault_bus: bus_id,
        split: Some((branch.to_string(), id_a, id_b)),
    })
}

fn split_record(c: &MutualCoupling, branch: &str, halves: &[(&str, f64, f64)]) -> Vec<MutualCoupling> {
    let on_a = c.branch_a == branch;
    if !on_a && c.branch_b != branch {
        return vec![c.clone()];
    }
    let (own, other) = if on_a {
        (c.span_a, c.span_b)
    } else {
        (c.span_b, c.span_a)
    };
    let mut out = Vec::new();
    for &(id, lo, hi) in halves {
        let ov_lo = own.from.max(lo);
        let ov_hi = own.to.min(hi);
        if ov_hi <= ov_lo {
            continue;
        }
        // position within the coupled run, 0..1
        let u0 = (ov_lo - own.from) / own.len();
        let u1 = (ov_hi - own.from) / own.len();
        let sub_own = Span {
            from: ((ov_lo - lo) / (hi - lo)).clamp(0.0, 1.0),
            to: ((ov_hi - lo) / (hi - lo)).clamp(0.0, 1.0),
        };
        let sub_other = Span {
            from: other.from + u0 * other.len(),
            to: other.from + u1 * other.len(),
        };
        let z0m = c.z0m * (u1 - u0);
        out.push(if on_a {
            MutualCoupling {
                branch_a: id.to_string(),
                branch_b: c.branch_b.clone(),
                z0m,
                span_a: sub_own,
                span_b: sub_other,
            }
        } else {
            MutualCoupling {
                branch_a: c.branch_a.clone(),
                branch_b: id.to_string(),
                z0m,
                span_a: sub_other,
                span_b: sub_own,
            }
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;

    fn demo() -> Network {
        parse_network(include_str!("../../../../data/networks/demo.json")).unwrap()
    }

    #[test]
    fn midpoint_halves_full_span_coupling() {
        let n = demo();
        let p = place_intermediate_fault(&n, "L1", 0.5).unwrap();
        let full = n.couplings.iter().find(|c| c.name() == "L1~L2").unwrap();
        let parts: Vec<_> = p
            .network
            .couplings
            .iter()
            .filter(|c| c.branch_b == "L2")
            .collect();
        assert_eq!(parts.len(), 2);
        for c in parts {
            assert!((c.z0m - full.z0m * 0.5).norm() < 1e-15);
            assert_eq!(c.span_a, Span::FULL);
        }
    }

    #[test]
    fn partial_span_apportioned_by_overlap() {
        let mut n = demo();
        // L1~N1 couples L1 over [0, 0.7] with N1 over [0.3, 1]
        let c = n.couplings.iter_mut().find(|c| c.name() == "L1~N1").unwrap();
        c.span_a = Span { from: 0.0, to: 0.7 };
        c.span_b = Span { from: 0.3, to: 1.0 };
        let p = place_intermediate_fault(&n, "L1", 0.35).unwrap();
        let total = n.couplings.iter().find(|c| c.name() == "L1~N1").unwrap().z0m;
        let a = p.network.couplings.iter().find(|c| c.name() == "L1#1~N1").unwrap();
        let b = p.network.couplings.iter().find(|c| c.name() == "L1#2~N1").unwrap();
        assert!((a.z0m - total * 0.5).norm() < 1e-15);
        assert!((b.z0m - total * 0.5).norm() < 1e-15);
        assert_eq!(a.span_a, Span::FULL);
        assert!((a.span_b.to - 0.65).abs() < 1e-12);
        assert!((b.span_a.to - 0.35 / 0.65).abs() < 1e-12);
        assert!((b.span_b.from - 0.65).abs() < 1e-12 && b.span_b.to == 1.0);
    }

    #[test]
    fn fault_beyond_coupled_span_keeps_whole_record_on_first_half() {
        let n = demo();
        let p = place_intermediate_fault(&n, "L1", 0.9).unwrap();
        let total = n.couplings.iter().find(|c| c.name() == "L1~N1").unwrap().z0m;
        let a = p.network.couplings.iter().find(|c| c.name() == "L1#1~N1").unwrap();
        assert!((a.z0m - total).norm() < 1e-15);
        assert!(!p.network.couplings.iter().any(|c| c.name() == "L1#2~N1"));
    }

    #[test]
    fn end_positions_reuse_terminal_buses() {
        let n = demo();
        assert_eq!(place_intermediate_fault(&n, "L1", 0.0).unwrap().fault_bus, "A");
        assert_eq!(place_intermediate_fault(&n, "L1", 1.0).unwrap().fault_bus, "B");
        assert!(place_intermediate_fault(&n, "L1", 1.5).is_err());
    }

    #[test]
    fn open_end_status_follows_its_half() {
        let n = demo().with_status("L1", BranchStatus::OpenAtFrom);
        let p = place_intermediate_fault(&n, "L1", 0.1).unwrap();
        assert_eq!(p.network.branch("L1#1").unwrap().status, BranchStatus::OpenAtFrom);
        assert_eq!(p.network.branch("L1#2").unwrap().status, BranchStatus::InService);
    }
}
