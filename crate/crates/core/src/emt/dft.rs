use num_complex::Complex64;
use serde::Serialize;

use crate::seq;

/// Fundamental phasors from a one-cycle sliding DFT. `time[k]` is the end
/// of the window that produced `phasors[k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasorTrack {
    pub time: Vec<f64>,
    pub phasors: Vec<Complex64>,
}

impl PhasorTrack {
    pub fn is_empty(&self) -> bool {
        self.phasors.is_empty()
    }

    pub fn len(&self) -> usize {
        self.phasors.len()
    }

    pub fn last(&self) -> Option<Complex64> {
        self.phasors.last().copied()
    }

    /// Phasor of the window ending at or just before `t`.
    pub fn at(&self, t: f64) -> Option<Complex64> {
        let k = self.time.partition_point(|&x| x <= t + 1e-12);
        k.checked_sub(1).map(|k| self.phasors[k])
    }
}

/// `X = (2/N)·Σ x[k]·e^{−jωt_k}` over the last `window` samples, so that
/// `x(t) = Re(X·e^{jωt})`. Fewer samples than one window give an empty track.
pub fn phasor_track(samples: &[f64], time: &[f64], frequency_hz: f64, window: usize) -> PhasorTrack {
    let n = samples.len().min(time.len());
    if window == 0 || n < window {
        return PhasorTrack {
            time: Vec::new(),
            phasors: Vec::new(),
        };
    }
    let omega = 2.0 * std::f64::consts::PI * frequency_hz;
    let term = |k: usize| Complex64::from_polar(samples[k], -omega * time[k]);
    let scale = 2.0 / window as f64;
    let mut sum: Complex64 = (0..window).map(term).sum();
    let mut out_t = Vec::with_capacity(n - window + 1);
    let mut out_p = Vec::with_capacity(n - window + 1);
    out_t.push(time[window - 1]);
    out_p.push(sum * scale);
    for k in window..n {
        sum += term(k) - term(k - window);
        // refresh periodically to keep rounding drift out of long records
        if (k + 1) % (64 * window) == 0 {
            sum = (k + 1 - window..=k).map(term).sum();
        }
        out_t.push(time[k]);
        out_p.push(sum * scale);
    }
    PhasorTrack {
        time: out_t,
        phasors: out_p,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceTrack {
    pub time: Vec<f64>,
    pub zero: Vec<Complex64>,
    pub positive: Vec<Complex64>,
    pub negative: Vec<Complex64>,
}

impl SequenceTrack {
    pub fn component(&self, k: usize) -> PhasorTrack {
        let v = match k {
            0 => &self.zero,
            1 => &self.positive,
            _ => &self.negative,
        };
        PhasorTrack {
            time: self.time.clone(),
            phasors: v.clone(),
        }
    }
}

/// Sequence components of three aligned per-phase tracks.
pub fn sequence_track(phases: [&PhasorTrack; 3]) -> SequenceTrack {
    let n = phases.iter().map(|p| p.len()).min().unwrap_or(0);
    let mut zero = Vec::with_capacity(n);
    let mut positive = Vec::with_capacity(n);
    let mut negative = Vec::with_capacity(n);
    for k in 0..n {
        let s = seq::to_sequence([phases[0].phasors[k], phases[1].phasors[k], phases[2].phasors[k]]);
        zero.push(s[0]);
        positive.push(s[1]);
        negative.push(s[2]);
    }
    SequenceTrack {
        time: phases[0].time[..n].to_vec(),
        zero,
        positive,
        negative,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, per_cycle: usize, f: f64) -> Vec<f64> {
        let dt = 1.0 / (f * per_cycle as f64);
        (0..n).map(|k| k as f64 * dt).collect()
    }

    #[test]
    fn cosine_gives_unit_phasor() {
        let f = 60.0;
        let t = grid(3000, 1000, f);
        let x: Vec<f64> = t.iter().map(|t| (2.0 * std::f64::consts::PI * f * t).cos()).collect();
        let tr = phasor_track(&x, &t, f, 1000);
        for p in &tr.phasors {
            assert!((p - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn short_record_gives_empty_track() {
        let t = grid(10, 100, 60.0);
        assert!(phasor_track(&[0.0; 10], &t, 60.0, 100).is_empty());
    }

    #[test]
    fn balanced_set_has_no_negative_sequence() {
        let f = 50.0;
        let t = grid(800, 400, f);
        let w = 2.0 * std::f64::consts::PI * f;
        let tracks: Vec<PhasorTrack> = (0..3)
            .map(|p| {
                let x: Vec<f64> = t
                    .iter()
                    .map(|t| (w * t + 0.3 - 2.0 * std::f64::consts::PI * p as f64 / 3.0).cos())
                    .collect();
                phasor_track(&x, &t, f, 400)
            })
            .collect();
        let s = sequence_track([&tracks[0], &tracks[1], &tracks[2]]);
        for v2 in &s.negative {
            assert!(v2.norm() < 1e-6);
        }
        assert!((s.positive[0] - Complex64::from_polar(1.0, 0.3)).norm() < 1e-9);
    }
}
