use serde::{Deserialize, Serialize};

use super::{TripReason, TripResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotScheme {
    /// Permissive overreaching transfer trip.
    Pott,
    /// Directional comparison blocking.
    Dcb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotConfig {
    pub scheme: PilotScheme,
    #[serde(default)]
    pub channel_delay_s: f64,
    /// Carrier coordination timer, DCB only.
    #[serde(default)]
    pub block_coordination_s: f64,
}

impl PilotConfig {
    pub fn check(&self) -> Result<(), String> {
        if !(self.channel_delay_s >= 0.0 && self.block_coordination_s >= 0.0) {
            return Err("pilot delays must be >= 0".into());
        }
        Ok(())
    }
}

/// Local terminal decision given both terminals' directional flags.
///
/// POTT trips after the channel delay when the local element sees forward and
/// a permissive signal arrives (remote forward). DCB trips after the
/// coordination timer when local is forward and no block arrives (remote
/// reverse sends the block).
pub fn pilot_evaluate(
    cfg: &PilotConfig,
    local_fwd: bool,
    local_rev: bool,
    remote_fwd: bool,
    remote_rev: bool,
) -> TripResult {
    // the local reverse element supervises neither scheme
    let _ = local_rev;
    if !local_fwd {
        return TripResult::no_trip(TripReason::DirectionalBlock);
    }
    match cfg.scheme {
        PilotScheme::Pott if remote_fwd => TripResult::trip(cfg.channel_delay_s, TripReason::Permitted),
        PilotScheme::Pott => TripResult::no_trip(TripReason::NoPermission),
        PilotScheme::Dcb if remote_rev => TripResult::no_trip(TripReason::Blocked),
        PilotScheme::Dcb => TripResult::trip(cfg.block_coordination_s, TripReason::Permitted),
    }
}
