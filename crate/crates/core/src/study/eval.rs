use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fault::{FaultSolution, PointPhasors};
use crate::network::{Network, Relay};
use crate::relay::{
    default_k0, goc_trip_time, ground_distance_z, neg_seq_direction, phase_distance_z, Direction,
    LoopKind, TripResult,
};

#[derive(Debug, Clone, PartialEq)]
pub struct RelayReading {
    /// Oriented phasors at the relay.
    pub phasors: PointPhasors,
    /// |3I0|, pu.
    pub residual: f64,
    pub direction: Direction,
}

pub fn read_relay(sol: &FaultSolution, relay: &Relay) -> Result<RelayReading> {
    let p = sol.measure(&relay.point).ok_or_else(|| Error::Unknown {
        kind: "branch",
        id: relay.point.branch.clone(),
    })?;
    let direction = neg_seq_direction(p.voltage[2], p.current[2], &relay.direction);
    Ok(RelayReading {
        residual: p.residual().norm(),
        direction,
        phasors: p,
    })
}

pub fn goc_time(relay: &Relay, reading: &RelayReading) -> Result<TripResult> {
    let s = relay.goc.as_ref().ok_or_else(|| {
        Error::Parameter(format!("relay `{}` has no ground overcurrent element", relay.id))
    })?;
    Ok(goc_trip_time(s, reading.residual, reading.direction))
}

/// Apparent impedance seen by the relay's distance element.
pub fn distance_apparent_impedance(n: &Network, relay: &Relay, p: &PointPhasors) -> Result<Complex64> {
    let d = relay.distance.as_ref().ok_or_else(|| {
        Error::Parameter(format!("relay `{}` has no distance element", relay.id))
    })?;
    let v = p.phase_voltages();
    let i = p.phase_currents();
    match d.loop_kind {
        LoopKind::Ground => {
            let k0 = match d.k0 {
                Some(k) => k,
                None => {
                    let b = n.branch(&relay.point.branch).ok_or_else(|| Error::Unknown {
                        kind: "branch",
                        id: relay.point.branch.clone(),
                    })?;
                    default_k0(b.z0, b.z1)
                }
            };
            ground_distance_z(v[0], i[0], p.residual(), k0)
        }
        LoopKind::Phase => phase_distance_z(v[1], v[2], i[1], i[2]),
    }
}
