use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::companion::{build_companion, Companion, Rule};
use super::dft::{phasor_track, sequence_track, PhasorTrack};
use super::metrics::{transient_metrics, TransientMetrics};
use super::model::{build_rl_network, fault_conductance, terminal_element, RlNetwork, NODE_LEAKAGE};
use super::record::{Channel, WaveformRecord};
use super::{EmtConfig, Inception};
use crate::error::{Error, Result};
use crate::fault::{FaultSpec, Placement, PointPhasors};
use crate::linalg::{c, CMatrix};
use crate::network::{Network, RelayPoint, Terminal};

const PHASES: [&str; 3] = ["a", "b", "c"];
/// Nodal residual (relative to the right-hand side) treated as divergence.
const KCL_LIMIT: f64 = 1e-6;

/// Steady-state phasors of the unfaulted network.
fn prefault_phasors(net: &RlNetwork) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let w = net.omega();
    let ne = net.elements.len();
    let z = CMatrix::from_fn(ne, ne, |i, k| c(net.r[(i, k)], w * net.l[(i, k)]));
    let y = crate::linalg::invert(&z, "element impedance")?;
    let a = net.incidence().map(|x| c(x, 0.0));
    let e = nalgebra::DVector::from_vec(net.emf.clone());
    let mut m = a.transpose() * &y * &a;
    for i in 0..m.nrows() {
        m[(i, i)] += c(NODE_LEAKAGE, 0.0);
    }
    let rhs = -(a.transpose() * (&y * &e));
    let v = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("prefault phasor system".into()))?;
    let i = &y * (&a * &v + e);
    Ok((v.iter().copied().collect(), i.iter().copied().collect()))
}

/// Fixed-step integrator for one fault scenario.
pub struct Simulator {
    pub net: RlNetwork,
    pub placement: Placement,
    pre: Companion,
    post: Companion,
    post_switch: Companion,
    pub dt: f64,
    pub samples_per_cycle: usize,
    /// Step index at which the fault switch closes.
    pub fault_step: usize,
    pub step: usize,
    pub v: DVector<f64>,
    pub i: DVector<f64>,
    sources_enabled: bool,
    /// Phase-a prefault voltage phasor at the fault bus.
    pub prefault_va: Complex64,
}

impl Simulator {
    pub fn new(n: &Network, fault: &FaultSpec, cfg: &EmtConfig) -> Result<Self> {
        cfg.check(n.frequency_hz)?;
        if !(fault.fault_resistance >= 0.0 && fault.fault_resistance.is_finite()) {
            return Err(Error::Parameter("fault resistance must be >= 0".into()));
        }
        let placement = Placement::new(n, &fault.location)?;
        let net = build_rl_network(&placement, fault.mutual_coupling)?;
        let period = 1.0 / n.frequency_hz;
        let samples_per_cycle = (period / cfg.dt - 1e-9).ceil() as usize;
        let dt = period / samples_per_cycle as f64;

        let gf = fault_conductance(&net, fault.kind, fault.fault_resistance);
        let open = nalgebra::DMatrix::zeros(gf.nrows(), gf.ncols());
        let pre = build_companion(&net, dt, Rule::Trapezoidal, Some(&open))?;
        let post = build_companion(&net, dt, Rule::Trapezoidal, Some(&gf))?;
        let post_switch = build_companion(&net, dt, Rule::BackwardEuler, Some(&gf))?;

        let (vp, ip) = prefault_phasors(&net)?;
        let prefault_va = vp[net.fault_nodes[0]];
        let w = net.omega();
        let t_f = match cfg.inception {
            Inception::Time(t) => t,
            Inception::Angle { degrees, after_s } => {
                // sin(ωt + ψ + π/2) = cos(ωt + ψ)
                let target = degrees.to_radians() - std::f64::consts::FRAC_PI_2 - prefault_va.arg();
                let base = target.rem_euclid(2.0 * std::f64::consts::PI) / w;
                base + (((after_s - base) / period).ceil().max(0.0)) * period
            }
        };
        let fault_step = (t_f / dt).round() as usize;

        let nodes = post.nodes();
        let mut v = DVector::zeros(nodes);
        for (k, x) in vp.iter().enumerate() {
            v[k] = x.re;
        }
        let i = DVector::from_iterator(ip.len(), ip.iter().map(|x| x.re));
        Ok(Self {
            net,
            placement,
            pre,
            post,
            post_switch,
            dt,
            samples_per_cycle,
            fault_step,
            step: 0,
            v,
            i,
            sources_enabled: true,
            prefault_va,
        })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn fault_time(&self) -> f64 {
        self.fault_step as f64 * self.dt
    }

    /// Realized inception angle (degrees of `sin` on phase-a prefault
    /// voltage), wrapped to (−180, 180].
    pub fn inception_angle_deg(&self) -> f64 {
        let theta = self.net.omega() * self.fault_time() + self.prefault_va.arg() + std::f64::consts::FRAC_PI_2;
        let d = theta.to_degrees().rem_euclid(360.0);
        if d > 180.0 {
            d - 360.0
        } else {
            d
        }
    }

    /// Zero all EMFs from now on.
    pub fn disable_sources(&mut self) {
        self.sources_enabled = false;
    }

    fn emf(&self, t: f64) -> DVector<f64> {
        if self.sources_enabled {
            self.net.emf_at(t)
        } else {
            DVector::zeros(self.net.elements.len())
        }
    }

    /// `½·iᵀ·L·i`.
    pub fn stored_energy(&self) -> f64 {
        0.5 * self.i.dot(&(&self.net.l * &self.i))
    }

    pub fn advance(&mut self) -> Result<()> {
        let t = self.time();
        let comp = if self.step < self.fault_step {
            &self.pre
        } else if self.step == self.fault_step {
            &self.post_switch
        } else {
            &self.post
        };
        let u_n = &comp.a * &self.v + self.emf(t);
        let e_next = self.emf(t + self.dt);
        let (v, i, residual) = comp.advance(&self.i, &u_n, &e_next)?;
        let scale = 1.0 + v.amax() * comp.nodal.amax();
        if !(v.iter().chain(i.iter()).all(|x| x.is_finite())) || residual > KCL_LIMIT * scale {
            return Err(Error::Divergence {
                step: self.step + 1,
                detail: format!("non-finite state or KCL residual {residual:.3e}"),
            });
        }
        self.v = v;
        self.i = i;
        self.step += 1;
        Ok(())
    }

    fn terminal_current(&self, branch: &str, terminal: Terminal, phase: usize) -> f64 {
        terminal_element(&self.net, &self.placement, branch, terminal, phase)
            .map_or(0.0, |(k, s)| s * self.i[k])
    }
}

/// Waveforms of one run plus the timing actually used.
#[derive(Debug, Clone, Serialize)]
pub struct EmtResult {
    pub record: WaveformRecord,
    pub frequency_hz: f64,
    pub dt: f64,
    pub samples_per_cycle: usize,
    pub fault_time: f64,
    pub inception_angle_deg: f64,
    pub fault_bus: String,
}

pub fn voltage_channel(bus: &str, phase: usize) -> String {
    format!("v.{bus}.{}", PHASES[phase])
}

pub fn current_channel(branch: &str, terminal: Terminal, phase: usize) -> String {
    let t = match terminal {
        Terminal::From => "from",
        Terminal::To => "to",
    };
    format!("i.{branch}.{t}.{}", PHASES[phase])
}

/// Run a fault scenario and record every bus voltage and every original
/// branch terminal current (from the bus into the line).
pub fn simulate(n: &Network, fault: &FaultSpec, cfg: &EmtConfig) -> Result<EmtResult> {
    let mut sim = Simulator::new(n, fault, cfg)?;
    let steps = (cfg.duration / sim.dt).round() as usize;

    let mut names = Vec::new();
    let mut probes: Vec<Box<dyn Fn(&Simulator) -> f64>> = Vec::new();
    for b in &n.buses {
        let bi = sim.placement.network.bus_index(&b.id).expect("bus kept");
        for ph in 0..3 {
            names.push(voltage_channel(&b.id, ph));
            let node = 3 * bi + ph;
            probes.push(Box::new(move |s: &Simulator| s.v[node]));
        }
    }
    for br in &n.branches {
        for terminal in [Terminal::From, Terminal::To] {
            for ph in 0..3 {
                names.push(current_channel(&br.id, terminal, ph));
                let id = br.id.clone();
                probes.push(Box::new(move |s: &Simulator| s.terminal_current(&id, terminal, ph)));
            }
        }
    }
    let mut data: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); names.len()];
    let mut time = Vec::with_capacity(steps + 1);
    let mut sample = |sim: &Simulator, time: &mut Vec<f64>| {
        time.push(sim.time());
        for (d, p) in data.iter_mut().zip(&probes) {
            d.push(p(sim));
        }
    };
    sample(&sim, &mut time);
    for _ in 0..steps {
        sim.advance()?;
        sample(&sim, &mut time);
    }
    Ok(EmtResult {
        record: WaveformRecord {
            dt: sim.dt,
            time,
            channels: names
                .into_iter()
                .zip(data)
                .map(|(name, samples)| Channel { name, samples })
                .collect(),
        },
        frequency_hz: n.frequency_hz,
        dt: sim.dt,
        samples_per_cycle: sim.samples_per_cycle,
        fault_time: sim.fault_time(),
        inception_angle_deg: sim.inception_angle_deg(),
        fault_bus: sim.placement.fault_bus.clone(),
    })
}

impl EmtResult {
    pub fn cycle(&self) -> f64 {
        1.0 / self.frequency_hz
    }

    pub fn track(&self, channel: &str) -> Option<PhasorTrack> {
        let x = self.record.channel(channel)?;
        Some(phasor_track(x, &self.record.time, self.frequency_hz, self.samples_per_cycle))
    }

    /// Sequence phasors at a relay point from the window ending at `t`,
    /// with the point's CT orientation applied.
    pub fn relay_phasors(&self, n: &Network, relay: &RelayPoint, t: f64) -> Result<PointPhasors> {
        let br = n.branch(&relay.branch).ok_or_else(|| Error::Unknown {
            kind: "branch",
            id: relay.branch.clone(),
        })?;
        let bus = match relay.terminal {
            Terminal::From => &br.from_bus,
            Terminal::To => &br.to_bus,
        };
        let at = |name: String| -> Result<Complex64> {
            self.track(&name)
                .and_then(|tr| tr.at(t))
                .ok_or_else(|| Error::MetricsUndefined(format!("no phasor for `{name}` at {t} s")))
        };
        let mut i = [c(0.0, 0.0); 3];
        let mut v = [c(0.0, 0.0); 3];
        for ph in 0..3 {
            i[ph] = at(current_channel(&relay.branch, relay.terminal, ph))? * relay.orientation;
            v[ph] = at(voltage_channel(bus, ph))?;
        }
        Ok(PointPhasors {
            branch: relay.branch.clone(),
            terminal: relay.terminal,
            current: crate::seq::to_sequence(i),
            voltage: crate::seq::to_sequence(v),
        })
    }

    /// Negative-sequence V2/I2 tracks at a relay point (orientation applied).
    pub fn negative_sequence_tracks(&self, n: &Network, relay: &RelayPoint) -> Result<(PhasorTrack, PhasorTrack)> {
        let br = n.branch(&relay.branch).ok_or_else(|| Error::Unknown {
            kind: "branch",
            id: relay.branch.clone(),
        })?;
        let bus = match relay.terminal {
            Terminal::From => &br.from_bus,
            Terminal::To => &br.to_bus,
        };
        let get = |name: String| {
            self.track(&name)
                .ok_or_else(|| Error::MetricsUndefined(format!("no channel `{name}`")))
        };
        let vt: Vec<PhasorTrack> = (0..3).map(|p| get(voltage_channel(bus, p))).collect::<Result<_>>()?;
        let mut it: Vec<PhasorTrack> = (0..3)
            .map(|p| get(current_channel(&relay.branch, relay.terminal, p)))
            .collect::<Result<_>>()?;
        for tr in &mut it {
            for p in &mut tr.phasors {
                *p *= relay.orientation;
            }
        }
        let v2 = sequence_track([&vt[0], &vt[1], &vt[2]]).component(2);
        let i2 = sequence_track([&it[0], &it[1], &it[2]]).component(2);
        Ok((v2, i2))
    }

    pub fn metrics(&self, channel: &str) -> Result<TransientMetrics> {
        let x = self
            .record
            .channel(channel)
            .ok_or_else(|| Error::MetricsUndefined(format!("no channel `{channel}`")))?;
        let tr = self.track(channel).expect("channel exists");
        transient_metrics(x, &self.record.time, &tr, self.fault_time, self.cycle())
    }
}

/// Metrics of one channel for several inception angles, run in parallel.
pub fn run_inception_sweep(
    n: &Network,
    fault: &FaultSpec,
    cfg: &EmtConfig,
    angles_deg: &[f64],
    channel: &str,
) -> Vec<Result<TransientMetrics>> {
    angles_deg
        .par_iter()
        .map(|&deg| {
            let after_s = match cfg.inception {
                Inception::Angle { after_s, .. } => after_s,
                Inception::Time(t) => t,
            };
            let cfg = EmtConfig {
                inception: Inception::Angle { degrees: deg, after_s },
                ..*cfg
            };
            simulate(n, fault, &cfg)?.metrics(channel)
        })
        .collect()
}
