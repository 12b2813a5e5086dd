//! Metrics JSON for the `emt` subcommand.

use mcstudy_core::emt::{
    current_channel, direction_reversal, phasor_track, transient_metrics, EmtResult,
    TransientMetrics,
};
use mcstudy_core::network::{RelayPoint, Terminal};
use mcstudy_core::{Complex64, Direction, FaultKind, FaultSpec, Network};
use serde::Serialize;

use crate::Failure;

#[derive(Debug, Serialize)]
pub struct RunInfo {
    pub fault_kind: FaultKind,
    pub fault_bus: String,
    pub mutual_coupling: bool,
    pub dt: f64,
    pub samples_per_cycle: usize,
    pub fault_time_s: f64,
    pub inception_angle_deg: f64,
    pub duration_s: f64,
}

#[derive(Debug, Serialize)]
pub struct RelayMetrics {
    pub relay: String,
    pub branch: String,
    pub terminal: Terminal,
    /// Settled sequence currents `[I0, I1, I2]` at the end of the record.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settled_current: Option<[Complex64; 3]>,
    /// Overshoot and reversal of the residual current 3I0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<TransientMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction_reversal: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct EmtReport {
    pub run: RunInfo,
    pub relays: Vec<RelayMetrics>,
}

/// 3I0 samples at a relay point with its CT orientation applied.
fn residual_samples(res: &EmtResult, p: &RelayPoint) -> Option<Vec<f64>> {
    let phases: Vec<&[f64]> = (0..3)
        .map(|k| res.record.channel(&current_channel(&p.branch, p.terminal, k)))
        .collect::<Option<_>>()?;
    Some(
        (0..res.record.len())
            .map(|i| p.orientation * (phases[0][i] + phases[1][i] + phases[2][i]))
            .collect(),
    )
}

pub fn build(n: &Network, spec: &FaultSpec, res: &EmtResult) -> Result<EmtReport, Failure> {
    let t_end = res.record.time.last().copied().unwrap_or(0.0);
    let mut relays = Vec::new();
    for r in &n.relays {
        let mut m = RelayMetrics {
            relay: r.id.clone(),
            branch: r.point.branch.clone(),
            terminal: r.point.terminal,
            settled_current: None,
            residual: None,
            direction: None,
            direction_reversal: None,
            errors: Vec::new(),
        };
        match res.relay_phasors(n, &r.point, t_end) {
            Ok(p) => m.settled_current = Some(p.current),
            Err(e) => m.errors.push(e.to_string()),
        }
        if spec.kind.involves_ground() {
            if let Some(x) = residual_samples(res, &r.point) {
                let track = phasor_track(&x, &res.record.time, res.frequency_hz, res.samples_per_cycle);
                match transient_metrics(&x, &res.record.time, &track, res.fault_time, res.cycle()) {
                    Ok(t) => m.residual = Some(t),
                    Err(e) => m.errors.push(e.to_string()),
                }
            }
        }
        if spec.kind != FaultKind::ThreePhase {
            let dir = res.negative_sequence_tracks(n, &r.point).and_then(|(v2, i2)| {
                direction_reversal(&v2, &i2, &r.direction, res.fault_time, res.cycle())
            });
            match dir {
                Ok((d, rev)) => {
                    m.direction = Some(d);
                    m.direction_reversal = Some(rev);
                }
                Err(e) => m.errors.push(e.to_string()),
            }
        }
        relays.push(m);
    }
    Ok(EmtReport {
        run: RunInfo {
            fault_kind: spec.kind,
            fault_bus: res.fault_bus.clone(),
            mutual_coupling: spec.mutual_coupling,
            dt: res.dt,
            samples_per_cycle: res.samples_per_cycle,
            fault_time_s: res.fault_time,
            inception_angle_deg: res.inception_angle_deg,
            duration_s: t_end,
        },
        relays,
    })
}
