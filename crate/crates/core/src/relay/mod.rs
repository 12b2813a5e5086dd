//! Protective elements: directional ground overcurrent, negative-sequence
//! directional element, mho distance and POTT/DCB pilot logic.

mod direction;
mod distance;
mod goc;
mod pilot;

pub use direction::{neg_seq_direction, Direction, DirectionSettings};
pub use distance::{
    default_k0, evaluate_distance, ground_distance_z, mho_zone_check, phase_distance_z,
    DistanceSetting, LoopKind, Zone, MIN_LOOP_CURRENT,
};
pub use goc::{goc_trip_time, Curve, GocSetting};
pub use pilot::{pilot_evaluate, PilotConfig, PilotScheme};

use serde::{Deserialize, Serialize};

/// Trip-time sentinel meaning "did not operate".
pub const NO_TRIP: f64 = 9999.0;

/// Floor applied to zero-delay elements: one 60 Hz cycle, standing in for
/// relay plus breaker operating time.
pub const MIN_OPERATE_TIME_S: f64 = 1.0 / 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TripReason {
    /// Inverse-time element picked up and timed out.
    Pickup,
    /// Operating quantity at or below pickup.
    NoPickup,
    DirectionalBlock,
    OutOfZone,
    /// DCB block signal received from the remote terminal.
    Blocked,
    /// Pilot trip: permission received or no block.
    Permitted,
    /// POTT without a permissive signal from the remote terminal.
    NoPermission,
    InZone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripResult {
    pub time_s: f64,
    pub reason: TripReason,
}

impl TripResult {
    pub fn trip(time_s: f64, reason: TripReason) -> Self {
        Self {
            time_s: time_s.max(MIN_OPERATE_TIME_S),
            reason,
        }
    }

    pub fn no_trip(reason: TripReason) -> Self {
        Self {
            time_s: NO_TRIP,
            reason,
        }
    }

    pub fn is_trip(&self) -> bool {
        self.time_s != NO_TRIP
    }
}
