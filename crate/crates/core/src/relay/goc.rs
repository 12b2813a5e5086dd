use serde::{Deserialize, Serialize};

use super::{Direction, TripReason, TripResult};

/// Inverse-time characteristic `t = TD · (A / (M^p − 1) + B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    ModeratelyInverse,
    VeryInverse,
    ExtremelyInverse,
    Custom { a: f64, b: f64, p: f64 },
}

impl Curve {
    pub fn constants(&self) -> (f64, f64, f64) {
        match *self {
            Curve::ModeratelyInverse => (0.0515, 0.1140, 0.02),
            Curve::VeryInverse => (19.61, 0.491, 2.0),
            Curve::ExtremelyInverse => (28.2, 0.1217, 2.0),
            Curve::Custom { a, b, p } => (a, b, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GocSetting {
    /// Residual (3I0) pickup, pu.
    pub pickup_3i0: f64,
    pub time_dial: f64,
    pub curve: Curve,
    #[serde(default = "yes")]
    pub directional: bool,
}

fn yes() -> bool {
    true
}

impl GocSetting {
    pub fn check(&self) -> Result<(), String> {
        if !(self.pickup_3i0 > 0.0 && self.pickup_3i0.is_finite()) {
            return Err("pickup_3i0 must be > 0".into());
        }
        if !(self.time_dial > 0.0 && self.time_dial.is_finite()) {
            return Err("time_dial must be > 0".into());
        }
        let (a, b, p) = self.curve.constants();
        if !(a > 0.0 && b >= 0.0 && p > 0.0) {
            return Err("curve constants need A > 0, B >= 0, p > 0".into());
        }
        Ok(())
    }
}

pub fn goc_trip_time(setting: &GocSetting, residual: f64, direction: Direction) -> TripResult {
    if setting.directional && direction != Direction::Forward {
        return TripResult::no_trip(TripReason::DirectionalBlock);
    }
    let m = residual / setting.pickup_3i0;
    if !(m > 1.0) {
        return TripResult::no_trip(TripReason::NoPickup);
    }
    let (a, b, p) = setting.curve.constants();
    let t = setting.time_dial * (a / (m.powf(p) - 1.0) + b);
    TripResult::trip(t, TripReason::Pickup)
}
