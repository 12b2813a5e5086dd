use rayon::prelude::*;
use serde::Serialize;

use super::eval::distance_apparent_impedance;
use super::ReportMetadata;
use crate::error::{Error, Result};
use crate::fault::{solve_fault, FaultKind, FaultSpec};
use crate::network::{BranchStatus, Network, Relay, Terminal};
use crate::relay::{mho_zone_check, LoopKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachSpec {
    pub relay: String,
    /// Bisection stops once the bracket is this narrow (fraction of line length).
    pub tolerance: f64,
    /// Statuses applied to every branch coupled with the protected branch.
    pub partner_statuses: Vec<BranchStatus>,
}

impl ReachSpec {
    pub fn new(relay: impl Into<String>) -> Self {
        Self {
            relay: relay.into(),
            tolerance: 0.001,
            partner_statuses: vec![BranchStatus::InService, BranchStatus::OutOfServiceGrounded],
        }
    }
}

/// Zone 1 reach measured from the relay terminal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "fraction", rename_all = "snake_case")]
pub enum ReachOutcome {
    Fraction(f64),
    /// Still in zone at the remote terminal.
    AtLeastFull,
    /// Out of zone even next to the relay.
    AtMostZero,
}

impl ReachOutcome {
    pub fn fraction(&self) -> f64 {
        match *self {
            ReachOutcome::Fraction(f) => f,
            ReachOutcome::AtLeastFull => 1.0,
            ReachOutcome::AtMostZero => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachRow {
    pub partner_status: BranchStatus,
    pub mutual_coupling: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reach: Option<ReachOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachReport {
    pub relay: String,
    pub branch: String,
    pub fault_kind: FaultKind,
    pub partners: Vec<String>,
    pub rows: Vec<ReachRow>,
    pub metadata: ReportMetadata,
}

impl ReachReport {
    pub fn reach(&self, status: BranchStatus, mutual_coupling: bool) -> Option<ReachOutcome> {
        self.rows
            .iter()
            .find(|r| r.partner_status == status && r.mutual_coupling == mutual_coupling)
            .and_then(|r| r.reach)
    }

    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Zone 1 reach by bisection on fault position, for every partner status
/// with coupling off and on. Ground loops are probed with SLG faults, phase
/// loops with LLG faults.
pub fn run_reach_study(n: &Network, spec: &ReachSpec) -> Result<ReachReport> {
    if !(spec.tolerance > 0.0 && spec.tolerance < 0.5) {
        return Err(Error::Parameter(format!(
            "reach tolerance {} must lie in (0, 0.5)",
            spec.tolerance
        )));
    }
    let relay = n.relay(&spec.relay).ok_or_else(|| Error::Unknown {
        kind: "relay",
        id: spec.relay.clone(),
    })?;
    let dist = relay.distance.as_ref().ok_or_else(|| {
        Error::Parameter(format!("relay `{}` has no distance element", relay.id))
    })?;
    let kind = match dist.loop_kind {
        LoopKind::Ground => FaultKind::Slg,
        LoopKind::Phase => FaultKind::Llg,
    };
    let branch = relay.point.branch.clone();
    let partners = n.coupled_partners(&branch);

    let mut jobs = Vec::new();
    for &status in &spec.partner_statuses {
        for mc in [false, true] {
            jobs.push((status, mc));
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(status, mc)| {
            let mut net = n.clone();
            for p in &partners {
                net = net.with_status(p, status);
            }
            match zone1_reach(&net, relay, kind, mc, spec.tolerance) {
                Ok(r) => ReachRow {
                    partner_status: status,
                    mutual_coupling: mc,
                    reach: Some(r),
                    error: None,
                },
                Err(e) => ReachRow {
                    partner_status: status,
                    mutual_coupling: mc,
                    reach: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(ReachReport {
        relay: relay.id.clone(),
        branch,
        fault_kind: kind,
        partners,
        rows,
        metadata: ReportMetadata::new(n, spec),
    })
}

fn zone1_reach(n: &Network, relay: &Relay, kind: FaultKind, mc: bool, tol: f64) -> Result<ReachOutcome> {
    let zone = relay.distance.as_ref().expect("checked").zones[0];
    // x is measured from the relay terminal
    let in_zone = |x: f64| -> Result<bool> {
        let m = match relay.point.terminal {
            Terminal::From => x,
            Terminal::To => 1.0 - x,
        };
        let spec = FaultSpec::on_branch(kind, &relay.point.branch, m).with_coupling(mc);
        let sol = solve_fault(n, &spec)?;
        let p = sol.measure(&relay.point).ok_or_else(|| Error::Unknown {
            kind: "branch",
            id: relay.point.branch.clone(),
        })?;
        let z = distance_apparent_impedance(n, relay, &p)?;
        Ok(mho_zone_check(z, zone.reach, zone.delay_s).is_trip())
    };
    let (mut lo, mut hi) = (tol, 1.0 - tol);
    if !in_zone(lo)? {
        return Ok(ReachOutcome::AtMostZero);
    }
    if in_zone(hi)? {
        return Ok(ReachOutcome::AtLeastFull);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if in_zone(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ReachOutcome::Fraction(0.5 * (lo + hi)))
}
