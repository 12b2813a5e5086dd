//! EMT fixtures: an analytic RL loop and phasor-solver cross-checks.

use std::f64::consts::PI;

use mcstudy_core::emt::{current_channel, simulate, EmtConfig, Inception};
use mcstudy_core::fault::solve_fault;
use mcstudy_core::network::parse_network;
use mcstudy_core::relay::neg_seq_direction;
use mcstudy_core::{Complex64, FaultKind, FaultSpec, Network, Terminal};

/// One source feeding one line into an unloaded bus. With z0 = z1 the three
/// phases decouple into independent series RL loops.
pub fn rl_network(rl_src: (f64, f64), rl_line: (f64, f64)) -> Network {
    parse_network(&format!(
        r#"{{
        "format_version": 1, "base_mva": 100, "frequency_hz": 60,
        "buses": [{{"id": "S", "kv": 230}}, {{"id": "R", "kv": 230}}],
        "sources": [{{"id": "G", "bus": "S", "emf": [1, 0],
            "z1": [{0}, {1}], "z0": [{0}, {1}]}}],
        "branches": [{{"id": "L", "from_bus": "S", "to_bus": "R",
            "z1": [{2}, {3}], "z0": [{2}, {3}], "length_km": 10}}]
    }}"#,
        rl_src.0, rl_src.1, rl_line.0, rl_line.1
    ))
    .unwrap()
}

pub const RF: f64 = 0.01;

/// Closed-form phase-a current of a series RL loop driven by cos(ωt) and
/// switched at `tf` from zero current.
pub fn rl_closed_form(r: f64, x: f64, f: f64, tf: f64, t: f64) -> f64 {
    let w = 2.0 * PI * f;
    let l = x / w;
    let z = Complex64::new(r, x);
    let ss = |t: f64| (Complex64::from_polar(1.0, w * t) / z).re;
    if t < tf {
        0.0
    } else {
        ss(t) - ss(tf) * (-(t - tf) * r / l).exp()
    }
}

/// Max error over the post-fault record relative to the analytic peak.
pub fn rl_error(dt: f64, degrees: f64) -> f64 {
    let n = rl_network((0.01, 0.1), (0.02, 0.2));
    let spec = FaultSpec::at_bus(FaultKind::ThreePhase, "R").with_resistance(RF);
    let cfg = EmtConfig {
        dt,
        duration: 8.0 / 60.0,
        inception: Inception::Angle { degrees, after_s: 1.0 / 60.0 },
    };
    let res = simulate(&n, &spec, &cfg).unwrap();
    let i = res.record.channel(&current_channel("L", Terminal::From, 0)).unwrap();
    let (r, x) = (0.03 + RF, 0.3);
    let mut err: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for (t, v) in res.record.time.iter().zip(i) {
        if *t < res.fault_time {
            continue;
        }
        let exact = rl_closed_form(r, x, 60.0, res.fault_time, *t);
        err = err.max((v - exact).abs());
        peak = peak.max(exact.abs());
    }
    err / peak
}

/// Settled DFT phasors at every relay point against the phasor solution.
pub fn cross_validate(n: &Network, spec: &FaultSpec) -> (f64, f64, usize) {
    let res = simulate(n, spec, &EmtConfig::new(n.frequency_hz)).unwrap();
    let sol = solve_fault(n, spec).unwrap();
    let t_end = *res.record.time.last().unwrap();
    let mut worst_mag: f64 = 0.0;
    let mut worst_ang: f64 = 0.0;
    let mut mismatched_dirs = 0;
    for relay in &n.relays {
        let emt = res.relay_phasors(n, &relay.point, t_end).unwrap();
        let ph = sol.measure(&relay.point).unwrap();
        for (a, b) in emt.phase_currents().iter().zip(ph.phase_currents()).chain(
            emt.phase_voltages().iter().zip(ph.phase_voltages()),
        ) {
            if b.norm() < 1e-3 {
                continue;
            }
            worst_mag = worst_mag.max((a.norm() - b.norm()).abs() / b.norm());
            worst_ang = worst_ang.max((a / b).arg().to_degrees().abs());
        }
        if spec.kind != FaultKind::ThreePhase {
            let (v2, i2) = res.negative_sequence_tracks(n, &relay.point).unwrap();
            let (dir, reversed) = mcstudy_core::emt::direction_reversal(
                &v2,
                &i2,
                &relay.direction,
                res.fault_time,
                res.cycle(),
            )
            .unwrap();
            let expected = neg_seq_direction(ph.voltage[2], ph.current[2], &relay.direction);
            if dir != expected || reversed {
                mismatched_dirs += 1;
            }
        }
    }
    (worst_mag, worst_ang, mismatched_dirs)
}

