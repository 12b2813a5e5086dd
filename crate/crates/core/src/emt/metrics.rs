use serde::Serialize;

use super::dft::PhasorTrack;
use crate::error::{Error, Result};
use crate::relay::{neg_seq_direction, Direction, DirectionSettings};

/// Band around the final magnitude that counts as settled.
pub const SETTLE_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransientMetrics {
    /// Peak post-fault instantaneous |x| over the settled phasor magnitude.
    pub overshoot_ratio: f64,
    pub reversal_detected: bool,
    /// Time after the fault until |phasor| stays within the settle band.
    pub settle_time_s: f64,
    pub steady_magnitude: f64,
}

/// Wrapped angle difference in (−π, π].
fn angle_between(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    if d > std::f64::consts::PI {
        d - 2.0 * std::f64::consts::PI
    } else {
        d
    }
}

/// Overshoot, polarity reversal and settling of one observable.
///
/// `samples`/`time` are the instantaneous record and `track` its sliding
/// phasor; `cycle` is one nominal period. The steady magnitude is the mean
/// |phasor| over the last cycle. A reversal is any swing of more than 90°
/// from the angle of the first window lying wholly after the fault.
pub fn transient_metrics(
    samples: &[f64],
    time: &[f64],
    track: &PhasorTrack,
    fault_time: f64,
    cycle: f64,
) -> Result<TransientMetrics> {
    let end = *time.last().ok_or_else(|| Error::MetricsUndefined("empty record".into()))?;
    if end < fault_time + 2.0 * cycle - 1e-12 {
        return Err(Error::MetricsUndefined(
            "record ends before a settled post-fault window".into(),
        ));
    }
    let first_settled = fault_time + cycle;
    let last: Vec<f64> = track
        .time
        .iter()
        .zip(&track.phasors)
        .filter(|(t, _)| **t > end - cycle + 1e-12)
        .map(|(_, p)| p.norm())
        .collect();
    if last.is_empty() {
        return Err(Error::MetricsUndefined("no phasors in the final cycle".into()));
    }
    let steady = last.iter().sum::<f64>() / last.len() as f64;
    if !(steady > 0.0) {
        return Err(Error::MetricsUndefined("observable is zero after the fault".into()));
    }
    let peak = samples
        .iter()
        .zip(time)
        .filter(|(_, t)| **t >= fault_time)
        .map(|(x, _)| x.abs())
        .fold(0.0, f64::max);

    let settled: Vec<(f64, num_complex::Complex64)> = track
        .time
        .iter()
        .zip(&track.phasors)
        .filter(|(t, _)| **t >= first_settled - 1e-12)
        .map(|(t, p)| (*t, *p))
        .collect();
    let reference = settled[0].1.arg();
    let reversal_detected = settled
        .iter()
        .filter(|(_, p)| p.norm() > 0.05 * steady)
        .any(|(_, p)| angle_between(p.arg(), reference).abs() > std::f64::consts::FRAC_PI_2);

    let mut settle_at = fault_time;
    for (t, p) in track.time.iter().zip(&track.phasors) {
        if *t >= fault_time && (p.norm() - steady).abs() > SETTLE_BAND * steady {
            settle_at = *t;
        }
    }
    Ok(TransientMetrics {
        overshoot_ratio: peak / steady,
        reversal_detected,
        settle_time_s: (settle_at - fault_time).max(0.0),
        steady_magnitude: steady,
    })
}

/// Lead/lag classification of I2 against V2 along aligned tracks.
pub fn direction_track(v2: &PhasorTrack, i2: &PhasorTrack, settings: &DirectionSettings) -> Vec<Direction> {
    v2.phasors
        .iter()
        .zip(&i2.phasors)
        .map(|(v, i)| neg_seq_direction(*v, *i, settings))
        .collect()
}

/// Settled direction and whether the classification changed after the
/// first settled post-fault window.
pub fn direction_reversal(
    v2: &PhasorTrack,
    i2: &PhasorTrack,
    settings: &DirectionSettings,
    fault_time: f64,
    cycle: f64,
) -> Result<(Direction, bool)> {
    let dirs = direction_track(v2, i2, settings);
    let settled: Vec<Direction> = v2
        .time
        .iter()
        .zip(dirs)
        .filter(|(t, _)| **t >= fault_time + cycle - 1e-12)
        .map(|(_, d)| d)
        .collect();
    let first = *settled
        .first()
        .ok_or_else(|| Error::MetricsUndefined("no settled negative-sequence window".into()))?;
    let last = *settled.last().expect("non-empty");
    let changed = settled.iter().any(|d| *d != first);
    Ok((last, changed))
}
