use rayon::prelude::*;
use serde::Serialize;

use super::eval::{goc_time, read_relay, RelayReading};
use super::{
    check_fractions, format_location, ReportMetadata, ReportRow, StudyReport,
    DEFAULT_NEAR_END_FRACTIONS, DEFAULT_REMOTE_END_FRACTIONS, DEFAULT_SWEEP_FRACTIONS,
};
use crate::error::{Error, Result};
use crate::fault::{solve_fault, FaultKind, FaultSolution, FaultSpec};
use crate::network::{BranchStatus, Network, Relay, Terminal};
use crate::relay::{pilot_evaluate, Direction, TripResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub monitored_branch: String,
    pub fractions: Vec<f64>,
    pub primary_relay: String,
    pub backup_relay: String,
    pub kind: FaultKind,
    pub fault_resistance: f64,
}

impl SweepSpec {
    /// SLG sweep at 10 % … 90 %.
    pub fn new(branch: impl Into<String>, primary: impl Into<String>, backup: impl Into<String>) -> Self {
        Self {
            monitored_branch: branch.into(),
            fractions: DEFAULT_SWEEP_FRACTIONS.to_vec(),
            primary_relay: primary.into(),
            backup_relay: backup.into(),
            kind: FaultKind::Slg,
            fault_resistance: 0.0,
        }
    }

    /// From the network's `study` section.
    pub fn from_defaults(n: &Network) -> Result<Self> {
        let d = n.study.clone().unwrap_or_default();
        let need = |v: Option<String>, what: &str| {
            v.ok_or_else(|| Error::Parameter(format!("network study section lacks `{what}`")))
        };
        Ok(Self::new(
            need(d.monitored_branch, "monitored_branch")?,
            need(d.primary_relay, "primary_relay")?,
            need(d.backup_relay, "backup_relay")?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineEndBlock {
    pub label: String,
    /// Terminal of the monitored branch opened before each fault.
    pub open_end: Terminal,
    pub fractions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineEndSpec {
    pub monitored_branch: String,
    pub primary_relay: String,
    pub backup_relay: String,
    pub blocks: Vec<LineEndBlock>,
    pub kind: FaultKind,
    pub fault_resistance: f64,
}

impl LineEndSpec {
    /// Near-end block (from terminal open, 0.5 %…20 %) and remote-end block
    /// (to terminal open, 80 %…99.5 %).
    pub fn new(branch: impl Into<String>, primary: impl Into<String>, backup: impl Into<String>) -> Self {
        Self {
            monitored_branch: branch.into(),
            primary_relay: primary.into(),
            backup_relay: backup.into(),
            blocks: vec![
                LineEndBlock {
                    label: "Near End Opened".into(),
                    open_end: Terminal::From,
                    fractions: DEFAULT_NEAR_END_FRACTIONS.to_vec(),
                },
                LineEndBlock {
                    label: "Remote End Opened".into(),
                    open_end: Terminal::To,
                    fractions: DEFAULT_REMOTE_END_FRACTIONS.to_vec(),
                },
            ],
            kind: FaultKind::Slg,
            fault_resistance: 0.0,
        }
    }

    pub fn from_defaults(n: &Network) -> Result<Self> {
        let s = SweepSpec::from_defaults(n)?;
        Ok(Self::new(s.monitored_branch, s.primary_relay, s.backup_relay))
    }
}

/// Faults along `branch`, evaluated at the relay pair's two terminals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PilotSpec {
    pub faulted_branch: String,
    pub fractions: Vec<f64>,
    /// Relay with a pilot link; its remote partner forms the second column group.
    pub local_relay: String,
    pub kind: FaultKind,
    pub fault_resistance: f64,
}

impl PilotSpec {
    pub fn new(branch: impl Into<String>, local: impl Into<String>) -> Self {
        Self {
            faulted_branch: branch.into(),
            fractions: DEFAULT_SWEEP_FRACTIONS.to_vec(),
            local_relay: local.into(),
            kind: FaultKind::Slg,
            fault_resistance: 0.0,
        }
    }
}

fn relay<'a>(n: &'a Network, id: &str) -> Result<&'a Relay> {
    n.relay(id).ok_or_else(|| Error::Unknown {
        kind: "relay",
        id: id.to_string(),
    })
}

fn require_branch(n: &Network, id: &str) -> Result<()> {
    n.branch(id).map(|_| ()).ok_or_else(|| Error::Unknown {
        kind: "branch",
        id: id.to_string(),
    })
}

fn require_goc(r: &Relay) -> Result<()> {
    match r.goc {
        Some(_) => Ok(()),
        None => Err(Error::Parameter(format!(
            "relay `{}` has no ground overcurrent element",
            r.id
        ))),
    }
}

fn both_toggles(n: &Network, branch: &str, m: f64, kind: FaultKind, rf: f64) -> Result<[FaultSolution; 2]> {
    let spec = FaultSpec::on_branch(kind, branch, m).with_resistance(rf);
    Ok([
        solve_fault(n, &spec.clone().with_coupling(false))?,
        solve_fault(n, &spec.with_coupling(true))?,
    ])
}

fn goc_row(
    n: &Network,
    branch: &str,
    m: f64,
    section: Option<String>,
    relays: [&Relay; 2],
    kind: FaultKind,
    rf: f64,
) -> ReportRow {
    let run = || -> Result<[f64; 4]> {
        let sols = both_toggles(n, branch, m, kind, rf)?;
        let mut t = [0.0; 4];
        for (g, r) in relays.iter().enumerate() {
            for (k, sol) in sols.iter().enumerate() {
                t[2 * g + k] = goc_time(r, &read_relay(sol, r)?)?.time_s;
            }
        }
        Ok(t)
    };
    match run() {
        Ok(t) => ReportRow {
            section,
            ..ReportRow::from_times(format_location(m), m, t)
        },
        Err(e) => ReportRow::failed(section, m, &e),
    }
}

/// Ground-overcurrent trip times for faults along the monitored branch,
/// without and with zero-sequence coupling. Failed rows carry their error.
pub fn run_goc_sweep(n: &Network, spec: &SweepSpec) -> Result<StudyReport> {
    check_fractions(&spec.fractions)?;
    require_branch(n, &spec.monitored_branch)?;
    let relays = [relay(n, &spec.primary_relay)?, relay(n, &spec.backup_relay)?];
    relays.iter().try_for_each(|r| require_goc(r))?;
    let rows = spec
        .fractions
        .par_iter()
        .map(|&m| {
            goc_row(
                n,
                &spec.monitored_branch,
                m,
                None,
                relays,
                spec.kind,
                spec.fault_resistance,
            )
        })
        .collect();
    Ok(StudyReport {
        title: format!("Ground overcurrent trip times, faults along {}", spec.monitored_branch),
        groups: [
            format!("Primary Relay {}", spec.primary_relay),
            format!("Backup Relay {}", spec.backup_relay),
        ],
        rows,
        metadata: ReportMetadata::new(n, spec),
    })
}

/// Sweep with one terminal of the monitored branch open, one block per
/// opened terminal.
pub fn run_line_end_study(n: &Network, spec: &LineEndSpec) -> Result<StudyReport> {
    require_branch(n, &spec.monitored_branch)?;
    let relays = [relay(n, &spec.primary_relay)?, relay(n, &spec.backup_relay)?];
    relays.iter().try_for_each(|r| require_goc(r))?;
    let mut jobs = Vec::new();
    for block in &spec.blocks {
        check_fractions(&block.fractions)?;
        let status = match block.open_end {
            Terminal::From => BranchStatus::OpenAtFrom,
            Terminal::To => BranchStatus::OpenAtTo,
        };
        let opened = n.with_status(&spec.monitored_branch, status);
        for &m in &block.fractions {
            jobs.push((block.label.clone(), opened.clone(), m));
        }
    }
    let rows = jobs
        .par_iter()
        .map(|(label, net, m)| {
            goc_row(
                net,
                &spec.monitored_branch,
                *m,
                Some(label.clone()),
                relays,
                spec.kind,
                spec.fault_resistance,
            )
        })
        .collect();
    Ok(StudyReport {
        title: format!(
            "Ground overcurrent trip times, line-end faults on {}",
            spec.monitored_branch
        ),
        groups: [
            format!("Primary Relay {}", spec.primary_relay),
            format!("Backup Relay {}", spec.backup_relay),
        ],
        rows,
        metadata: ReportMetadata::new(n, spec),
    })
}

/// Pilot-scheme trip times at both terminals of a pilot pair.
pub fn run_pilot_study(n: &Network, spec: &PilotSpec) -> Result<StudyReport> {
    check_fractions(&spec.fractions)?;
    require_branch(n, &spec.faulted_branch)?;
    let local = relay(n, &spec.local_relay)?;
    let link = local.pilot.as_ref().ok_or_else(|| {
        Error::Parameter(format!("relay `{}` has no pilot link", local.id))
    })?;
    let remote = relay(n, &link.remote)?;
    if remote.pilot.is_none() {
        return Err(Error::Parameter(format!("relay `{}` has no pilot link", remote.id)));
    }

    // forward/reverse flags, supervised by the ground element pickup when present
    let flags = |r: &Relay, reading: &RelayReading| -> (bool, bool) {
        let picked = r.goc.map_or(true, |g| reading.residual > g.pickup_3i0);
        (
            picked && reading.direction == Direction::Forward,
            picked && reading.direction == Direction::Reverse,
        )
    };
    let decide = |r: &Relay, own: (bool, bool), other: (bool, bool)| -> TripResult {
        let cfg = &r.pilot.as_ref().expect("checked").config;
        pilot_evaluate(cfg, own.0, own.1, other.0, other.1)
    };

    let rows = spec
        .fractions
        .par_iter()
        .map(|&m| {
            let run = || -> Result<[f64; 4]> {
                let sols = both_toggles(n, &spec.faulted_branch, m, spec.kind, spec.fault_resistance)?;
                let mut t = [0.0; 4];
                for (k, sol) in sols.iter().enumerate() {
                    let fl = flags(local, &read_relay(sol, local)?);
                    let fr = flags(remote, &read_relay(sol, remote)?);
                    t[k] = decide(local, fl, fr).time_s;
                    t[2 + k] = decide(remote, fr, fl).time_s;
                }
                Ok(t)
            };
            match run() {
                Ok(t) => ReportRow::from_times(format_location(m), m, t),
                Err(e) => ReportRow::failed(None, m, &e),
            }
        })
        .collect();
    Ok(StudyReport {
        title: format!(
            "Pilot scheme trip times, faults along {}",
            spec.faulted_branch
        ),
        groups: [
            format!("Local Terminal {}", local.id),
            format!("Remote Terminal {}", remote.id),
        ],
        rows,
        metadata: ReportMetadata::new(n, spec),
    })
}
