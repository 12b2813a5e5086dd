//! Lumped coupled-RL time-domain simulation with trapezoidal companions,
//! sliding-DFT phasors and transient metrics.

mod companion;
mod dft;
mod metrics;
mod model;
mod record;
mod sim;

pub use companion::{build_companion, Companion, Rule};
pub use dft::{phasor_track, sequence_track, PhasorTrack, SequenceTrack};
pub use metrics::{direction_reversal, direction_track, transient_metrics, TransientMetrics, SETTLE_BAND};
pub use model::{
    build_rl_network, fault_conductance, ElementKind, RlNetwork, IDEAL_FAULT_CONDUCTANCE,
    NODE_LEAKAGE,
};
pub use record::{Channel, WaveformRecord};
pub use sim::{
    current_channel, run_inception_sweep, simulate, voltage_channel, EmtResult, Simulator,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DT: f64 = 10e-6;
pub const MAX_DT: f64 = 100e-6;

/// When the fault switch closes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inception {
    /// Absolute time, s.
    Time(f64),
    /// Point on the phase-a prefault voltage wave at the fault bus, in
    /// degrees of `sin`, at the first such instant after `after_s`.
    Angle { degrees: f64, after_s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmtConfig {
    /// Requested step; the run uses the largest step not above it that fits
    /// a whole number of times into one cycle.
    pub dt: f64,
    pub duration: f64,
    pub inception: Inception,
}

impl EmtConfig {
    /// Fault at 0° two cycles in, ten cycles of post-fault record.
    pub fn new(frequency_hz: f64) -> Self {
        let cycle = 1.0 / frequency_hz;
        Self {
            dt: DEFAULT_DT,
            duration: 13.0 * cycle,
            inception: Inception::Angle {
                degrees: 0.0,
                after_s: 2.0 * cycle,
            },
        }
    }

    pub fn check(&self, frequency_hz: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(Error::Parameter(format!(
                "dt {} must lie in (0, {MAX_DT}]",
                self.dt
            )));
        }
        let cycle = 1.0 / frequency_hz;
        let latest = match self.inception {
            Inception::Time(t) => t,
            Inception::Angle { after_s, .. } => after_s + cycle,
        };
        if !(latest >= 0.0) {
            return Err(Error::Parameter("fault time must be >= 0".into()));
        }
        if !(self.duration >= latest + 5.0 * cycle) {
            return Err(Error::Parameter(format!(
                "duration {} s leaves fewer than 5 cycles after the fault",
                self.duration
            )));
        }
        Ok(())
    }
}
