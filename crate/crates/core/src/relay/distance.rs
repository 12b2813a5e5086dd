use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{TripReason, TripResult};
use crate::error::{Error, Result};

/// Loop currents smaller than this (pu) give no impedance measurement.
pub const MIN_LOOP_CURRENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopKind {
    /// Phase-to-ground loop with residual compensation, studied with SLG faults.
    Ground,
    /// Phase-pair loop, studied with LLG faults.
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Zone {
    /// Mho reach along the line angle, pu.
    pub reach: Complex64,
    pub delay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceSetting {
    pub zones: Vec<Zone>,
    /// Residual compensation factor; defaults to `(Z0 − Z1)/(3·Z1)` of the
    /// protected line when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<Complex64>,
    #[serde(rename = "loop")]
    pub loop_kind: LoopKind,
}

impl DistanceSetting {
    pub fn check(&self) -> std::result::Result<(), String> {
        let Some(first) = self.zones.first() else {
            return Err("at least one zone required".into());
        };
        if first.delay_s != 0.0 {
            return Err("zone 1 delay must be 0".into());
        }
        for z in &self.zones {
            if z.reach.norm() == 0.0 || !(z.reach.re.is_finite() && z.reach.im.is_finite()) {
                return Err("zone reach must be finite and non-zero".into());
            }
            if !(z.delay_s >= 0.0) {
                return Err("zone delay must be >= 0".into());
            }
        }
        for w in self.zones.windows(2) {
            if w[1].reach.norm() <= w[0].reach.norm() {
                return Err("zone reaches must increase".into());
            }
            if w[1].delay_s < w[0].delay_s {
                return Err("zone delays must not decrease".into());
            }
        }
        Ok(())
    }
}

pub fn default_k0(z0: Complex64, z1: Complex64) -> Complex64 {
    (z0 - z1) / (z1 * 3.0)
}

/// Apparent impedance of the phase-a ground loop, `Va / (Ia + k0·Ires)`.
pub fn ground_distance_z(
    va: Complex64,
    ia: Complex64,
    i_res: Complex64,
    k0: Complex64,
) -> Result<Complex64> {
    let loop_current = ia + k0 * i_res;
    if loop_current.norm() < MIN_LOOP_CURRENT {
        return Err(Error::NoMeasurement {
            magnitude: loop_current.norm(),
        });
    }
    Ok(va / loop_current)
}

/// Apparent impedance of the b-c phase loop, `(Vb − Vc) / (Ib − Ic)`.
pub fn phase_distance_z(
    vb: Complex64,
    vc: Complex64,
    ib: Complex64,
    ic: Complex64,
) -> Result<Complex64> {
    let loop_current = ib - ic;
    if loop_current.norm() < MIN_LOOP_CURRENT {
        return Err(Error::NoMeasurement {
            magnitude: loop_current.norm(),
        });
    }
    Ok((vb - vc) / loop_current)
}

/// Mho circle through the origin and `reach`; the boundary counts as inside.
pub fn mho_zone_check(z_app: Complex64, reach: Complex64, delay_s: f64) -> TripResult {
    let center = reach * 0.5;
    let radius = center.norm();
    // relative slack so a point exactly on the circle is not lost to rounding
    if (z_app - center).norm() <= radius * (1.0 + 1e-12) {
        TripResult::trip(delay_s, TripReason::InZone)
    } else {
        TripResult::no_trip(TripReason::OutOfZone)
    }
}

/// First zone (in setting order) whose characteristic contains `z_app`.
pub fn evaluate_distance(setting: &DistanceSetting, z_app: Complex64) -> TripResult {
    setting
        .zones
        .iter()
        .map(|z| mho_zone_check(z_app, z.reach, z.delay_s))
        .find(TripResult::is_trip)
        .unwrap_or_else(|| TripResult::no_trip(TripReason::OutOfZone))
}
