use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Reverse,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DirectionSettings {
    /// Minimum |I2|, pu.
    pub min_i2: f64,
    /// Minimum |V2|, pu.
    pub min_v2: f64,
    /// Swap forward and reverse (for conventions that measure against −V2).
    pub invert: bool,
}

impl Default for DirectionSettings {
    fn default() -> Self {
        Self {
            min_i2: 1e-3,
            min_v2: 1e-3,
            invert: false,
        }
    }
}

/// Negative-sequence directional decision: I2 leading V2 is forward, I2
/// lagging V2 is reverse.
pub fn neg_seq_direction(v2: Complex64, i2: Complex64, settings: &DirectionSettings) -> Direction {
    if !(i2.norm() >= settings.min_i2 && v2.norm() >= settings.min_v2) {
        return Direction::Indeterminate;
    }
    // arg of the quotient is already the relative angle in (-pi, pi]
    let theta = (i2 / v2).arg();
    let d = if theta > 0.0 && theta < std::f64::consts::PI {
        Direction::Forward
    } else if theta < 0.0 {
        Direction::Reverse
    } else {
        Direction::Indeterminate
    };
    match (d, settings.invert) {
        (Direction::Forward, true) => Direction::Reverse,
        (Direction::Reverse, true) => Direction::Forward,
        (d, _) => d,
    }
}
