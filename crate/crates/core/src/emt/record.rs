use std::fmt::Write;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Channel {
    pub name: String,
    pub samples: Vec<f64>,
}

/// Uniformly sampled instantaneous waveforms in pu.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveformRecord {
    pub dt: f64,
    pub time: Vec<f64>,
    pub channels: Vec<Channel>,
}

impl WaveformRecord {
    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.samples.as_slice())
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// `time` column followed by one column per channel.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time");
        for c in &self.channels {
            out.push(',');
            out.push_str(&c.name);
        }
        out.push('\n');
        for (k, t) in self.time.iter().enumerate() {
            let _ = write!(out, "{t:.9e}");
            for c in &self.channels {
                let _ = write!(out, ",{:.9e}", c.samples[k]);
            }
            out.push('\n');
        }
        out
    }
}
