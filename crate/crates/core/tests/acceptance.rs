//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p mcstudy-core --test acceptance`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::emt_fixtures::{cross_validate, rl_error};
use common::{network, oracle, ORACLE_NETWORKS};
use mcstudy_core::emt::{
    current_channel, direction_reversal, phasor_track, simulate, transient_metrics, EmtConfig,
    PhasorTrack,
};
use mcstudy_core::fault::{decompose_3i0, solve_fault};
use mcstudy_core::line_constants::{
    coupling_vs_separation, earth_constant, to_sequence, GeometryFile, LineConstants,
};
use mcstudy_core::relay::{
    goc_trip_time, pilot_evaluate, Curve, DirectionSettings, GocSetting, PilotConfig, PilotScheme,
};
use mcstudy_core::study::{
    distance_apparent_impedance, render_report, run_goc_sweep, run_line_end_study,
    run_reach_study, LineEndSpec, ReachSpec, ReportMetadata, ReportRow, SweepSpec,
};
use mcstudy_core::{
    BranchStatus, Complex64, Direction, EarthModel, FaultKind, FaultSpec, PhaseImpedanceMatrix,
    ReportFormat, StudyReport, NO_TRIP,
};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_earth_constant() -> Outcome {
    let k = earth_constant(&EarthModel::default());
    ensure((k - 6.7458).abs() <= 1e-3, || format!("K = {k}"))?;
    Ok(format!("K = {k:.6}"))
}

fn c2_sequence_diagonalization() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst_off: f64 = 0.0;
    let mut worst_diag: f64 = 0.0;
    for _ in 0..1000 {
        let mut draw = || Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let (zs, zm) = (draw(), draw());
        let z = DMatrix::from_fn(3, 3, |i, k| if i == k { zs } else { zm });
        let scale = zs.norm().max(zm.norm());
        let s = to_sequence(&PhaseImpedanceMatrix::new(z).unwrap(), &["c".into()]).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                if i != k {
                    worst_off = worst_off.max(s.full[(i, k)].norm() / scale);
                }
            }
        }
        let c = &s.circuits[0];
        for (got, want) in [(c.z0, zs + zm * 2.0), (c.z1, zs - zm), (c.z2, zs - zm)] {
            worst_diag = worst_diag.max((got - want).norm() / scale);
        }
    }
    ensure(worst_off <= 1e-12 && worst_diag <= 1e-12, || {
        format!("off-diagonal {worst_off:e}, diagonal {worst_diag:e}")
    })?;
    Ok(format!("1000 matrices, off-diagonal {worst_off:.1e}, diagonal {worst_diag:.1e}"))
}

fn c3_coupling_magnitude() -> Outcome {
    let load = |name: &str| {
        GeometryFile::load(&common::data_dir().join("geometry").join(format!("{name}.json"))).unwrap()
    };
    let dc = load("double_circuit");
    let lc = LineConstants::compute(&dc.geometry, &dc.earth, dc.transposed).unwrap();
    let z0 = lc.sequence.circuit("C1").unwrap().z0;
    let same = lc.sequence.z0m("C1", "C2").unwrap().norm() / z0.norm();
    let single = load("corridor_single");
    let sc = LineConstants::compute(&single.geometry, &single.earth, single.transposed).unwrap();
    let z0s = sc.sequence.circuit("C1").unwrap().z0;
    let m = coupling_vs_separation(&single.geometry, &single.geometry, &[30.0], &single.earth).unwrap();
    let corridor = m[0].1.norm() / z0s.norm();
    ensure((0.5..=0.7).contains(&same), || format!("same-tower ratio {same}"))?;
    ensure(corridor < same, || format!("corridor {corridor} >= same-tower {same}"))?;
    Ok(format!("same tower {same:.3}, 30 m corridor {corridor:.3}"))
}

fn c4_oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut nets = 0;
    for name in ORACLE_NETWORKS {
        let n = network(name);
        ensure(n.buses.len() <= 6 && !n.couplings.is_empty(), || format!("{name} outside fixture limits"))?;
        nets += 1;
        for spec in oracle::specs(name) {
            if let Some(e) = oracle::compare(name, &spec) {
                ensure(e <= 1e-9, || format!("{name} {spec:?}: {e:e}"))?;
                worst = worst.max(e);
                count += 1;
            }
        }
    }
    ensure(nets >= 5, || format!("only {nets} networks"))?;
    Ok(format!("{nets} networks, {count} faults, worst relative error {worst:.1e}"))
}

fn c5_zero_sequence_absence() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in ORACLE_NETWORKS {
        let n = network(name);
        for kind in [FaultKind::ThreePhase, FaultKind::Ll] {
            let mut specs: Vec<FaultSpec> = n.buses.iter().map(|b| FaultSpec::at_bus(kind, &b.id)).collect();
            for br in &n.branches {
                for m in [0.1, 0.5, 0.9] {
                    specs.push(FaultSpec::on_branch(kind, &br.id, m));
                }
            }
            for spec in specs {
                let Ok(sol) = solve_fault(&n, &spec) else { continue };
                for p in &sol.points {
                    worst = worst.max(p.residual().norm());
                }
            }
        }
    }
    ensure(worst <= 1e-9, || format!("|3I0| = {worst:e}"))?;
    Ok(format!("max |3I0| = {worst:.1e} pu"))
}

fn c6_decomposition() -> Outcome {
    let mut n = network("demo");
    for c in &mut n.couplings {
        c.z0m = Complex64::new(0.0, 0.0);
    }
    for r in &n.relays {
        let d = decompose_3i0(&n, &FaultSpec::on_branch(FaultKind::Slg, "L1", 0.4), &r.point).unwrap();
        ensure(d.induced == Complex64::new(0.0, 0.0), || format!("induced {} at {}", d.induced, r.id))?;
    }
    let demo = network("demo");
    let d = decompose_3i0(&demo, &FaultSpec::on_branch(FaultKind::Slg, "L1", 0.4), &demo.relay("RP").unwrap().point).unwrap();
    ensure(d.induced.norm() > 0.0, || "coupled demo shows no induced 3I0".into())?;

    let sweep = |name: &str| {
        let n = network(name);
        let spec = SweepSpec::from_defaults(&n).unwrap();
        (n.clone(), spec.clone(), run_goc_sweep(&n, &spec).unwrap())
    };
    let (an, aspec, add) = sweep("additive");
    let rp = an.relay(&aspec.primary_relay).unwrap();
    for row in &add.rows {
        let d = decompose_3i0(&an, &FaultSpec::on_branch(FaultKind::Slg, "L1", row.fraction), &rp.point).unwrap();
        ensure(d.with_coupling().norm() > d.fault_based.norm(), || format!("additive {}: |3I0| not larger", row.location))?;
        let (a, b) = (row.first_without_mc.unwrap(), row.first_with_mc.unwrap());
        ensure(b < a, || format!("additive {}: {a} -> {b}", row.location))?;
    }
    let (_, _, sub) = sweep("subtractive");
    let finite: Vec<&ReportRow> = sub.rows.iter().filter(|r| r.first_without_mc.unwrap() < NO_TRIP).collect();
    ensure(!finite.is_empty(), || "subtractive fixture never trips".into())?;
    for row in &finite {
        let (a, b) = (row.first_without_mc.unwrap(), row.first_with_mc.unwrap());
        ensure(b > a, || format!("subtractive {}: {a} -> {b}", row.location))?;
    }
    Ok(format!(
        "additive faster at {} rows, subtractive slower at {} rows",
        add.rows.len(),
        finite.len()
    ))
}

fn c7_table_shape() -> Outcome {
    let n = network("demo");
    let sweep = run_goc_sweep(&n, &SweepSpec::from_defaults(&n).unwrap()).unwrap();
    let mid: Vec<&ReportRow> = sweep.rows.iter().filter(|r| (0.3..=0.7).contains(&r.fraction)).collect();
    ensure(!mid.is_empty(), || "no mid-line rows".into())?;
    for r in &mid {
        ensure(r.first_without_mc == Some(NO_TRIP), || format!("{}: without-MC {:?}", r.location, r.first_without_mc))?;
        let t = r.first_with_mc.unwrap();
        ensure(t < NO_TRIP, || format!("{}: with-MC {t}", r.location))?;
    }
    let le = run_line_end_study(&n, &LineEndSpec::from_defaults(&n).unwrap()).unwrap();
    let remote: Vec<&ReportRow> = le.rows.iter().filter(|r| r.section.as_deref() == Some("Remote End Opened")).collect();
    ensure(!remote.is_empty(), || "no remote-end block".into())?;
    for r in &remote {
        ensure(r.times().iter().all(|t| *t == Some(NO_TRIP)), || format!("remote {}: {:?}", r.location, r.times()))?;
    }
    let literal = StudyReport {
        title: String::new(),
        groups: ["Primary Relay".into(), "Backup Relay".into()],
        rows: vec![ReportRow::from_times("30%", 0.3, [NO_TRIP, 1.9, NO_TRIP, 2.5])],
        metadata: ReportMetadata {
            network_hash: String::new(),
            settings_hash: String::new(),
            timestamp: None,
        },
    };
    let line = render_report(&literal, ReportFormat::Csv).lines().nth(1).unwrap().to_string();
    ensure(line == "30%,9999,1.9,9999,2.5", || format!("rendered `{line}`"))?;
    Ok(format!(
        "{} mid-line rows 9999 -> finite, {} remote-end rows all 9999, row `{line}`",
        mid.len(),
        remote.len()
    ))
}

fn c8_distance() -> Outcome {
    let n = network("demo");
    let bare = n.without_couplings();
    let rn = bare.relay("RN").unwrap();
    let z1 = bare.branch(&rn.point.branch).unwrap().z1;
    let mut worst: f64 = 0.0;
    for m in [0.05, 0.2, 0.5, 0.8, 0.95] {
        let sol = solve_fault(&bare, &FaultSpec::on_branch(FaultKind::Slg, &rn.point.branch, m)).unwrap();
        let z = distance_apparent_impedance(&bare, rn, &sol.measure(&rn.point).unwrap()).unwrap();
        worst = worst.max((z - z1 * m).norm() / (z1 * m).norm());
    }
    ensure(worst <= 1e-9, || format!("Zapp error {worst:e}"))?;
    let set = n.relay("RN").unwrap().distance.as_ref().unwrap().zones[0].reach.norm() / z1.norm();
    let reach = run_reach_study(&n, &ReachSpec::new("RN")).unwrap();
    let got = reach.reach(BranchStatus::InService, false).unwrap().fraction();
    ensure((got - set).abs() <= 0.005, || format!("reach {got} vs set {set}"))?;
    Ok(format!("Zapp error {worst:.1e}, reach {:.2}% vs set {:.2}%", 100.0 * got, 100.0 * set))
}

fn c9_curve() -> Outcome {
    let s = GocSetting {
        pickup_3i0: 1.0,
        time_dial: 1.0,
        curve: Curve::VeryInverse,
        directional: false,
    };
    let t = goc_trip_time(&s, 2.0, Direction::Forward).time_s;
    let oracle = 19.61 / (2.0f64.powi(2) - 1.0) + 0.491;
    ensure((t - 7.028).abs() <= 1e-3 && (t - oracle).abs() <= 1e-12, || format!("t = {t}"))?;
    let grid: Vec<f64> = (0..200).map(|k| 1.05 + 0.1 * k as f64).collect();
    let times: Vec<f64> = grid.iter().map(|m| goc_trip_time(&s, *m, Direction::Forward).time_s).collect();
    ensure(times.windows(2).all(|w| w[1] < w[0]), || "not monotone".into())?;
    Ok(format!("t(M=2) = {t:.4} s, monotone over {} points", grid.len()))
}

fn c10_pilot() -> Outcome {
    let cfg = |scheme| PilotConfig {
        scheme,
        channel_delay_s: 0.02,
        block_coordination_s: 0.03,
    };
    let mut rows = 0;
    for scheme in [PilotScheme::Pott, PilotScheme::Dcb] {
        let c = cfg(scheme);
        for bits in 0..16u8 {
            let [lf, lr, rf, rr] = [0, 1, 2, 3].map(|k| bits & (1 << k) != 0);
            let want = match scheme {
                PilotScheme::Pott => (lf && rf).then_some(0.02),
                PilotScheme::Dcb => (lf && !rr).then_some(0.03),
            };
            let got = pilot_evaluate(&c, lf, lr, rf, rr);
            let got_t = got.is_trip().then_some(got.time_s);
            ensure(got_t == want, || format!("{scheme:?} {lf} {lr} {rf} {rr}: {got:?}"))?;
            if !got.is_trip() {
                ensure(got.time_s == NO_TRIP, || "no-trip without 9999".into())?;
            }
            rows += 1;
        }
    }
    Ok(format!("{rows} rows match"))
}

fn c11_emt_closed_form() -> Outcome {
    let e10 = rl_error(10e-6, 30.0);
    let e5 = rl_error(5e-6, 30.0);
    let ratio = e10 / e5;
    ensure(e10 <= 2e-3, || format!("error {e10:e}"))?;
    ensure((3.0..=5.0).contains(&ratio), || format!("ratio {ratio}"))?;
    Ok(format!("max error {:.2e}% at 10 us, halving ratio {ratio:.2}", 100.0 * e10))
}

fn flipped_track() -> (PhasorTrack, Vec<f64>, Vec<f64>) {
    let f = 60.0;
    let n = 256;
    let dt = 1.0 / (f * n as f64);
    let time: Vec<f64> = (0..12 * n).map(|k| k as f64 * dt).collect();
    let w = 2.0 * std::f64::consts::PI * f;
    let x: Vec<f64> = time
        .iter()
        .map(|t| {
            let s = if *t < 6.0 / f { 1.0 } else { -1.0 };
            s * (w * t).cos()
        })
        .collect();
    (phasor_track(&x, &time, f, n), x, time)
}

fn c12_cross_validation() -> Outcome {
    let n = network("demo");
    let mut worst_mag: f64 = 0.0;
    let mut worst_ang: f64 = 0.0;
    for spec in [
        FaultSpec::on_branch(FaultKind::Slg, "L1", 0.3),
        FaultSpec::on_branch(FaultKind::Slg, "N1", 0.5),
        FaultSpec::on_branch(FaultKind::Llg, "L2", 0.7),
        FaultSpec::at_bus(FaultKind::Ll, "B"),
        FaultSpec::at_bus(FaultKind::ThreePhase, "C"),
    ] {
        let (mag, ang, dirs) = cross_validate(&n, &spec);
        ensure(mag <= 0.01, || format!("{spec:?}: magnitude {mag}"))?;
        ensure(ang <= 2.0, || format!("{spec:?}: angle {ang}"))?;
        ensure(dirs == 0, || format!("{spec:?}: {dirs} direction mismatches or reversals"))?;
        worst_mag = worst_mag.max(mag);
        worst_ang = worst_ang.max(ang);
    }
    // clean fixture: no phasor reversal on any relay current
    let res = simulate(&n, &FaultSpec::on_branch(FaultKind::Slg, "L1", 0.3), &EmtConfig::new(60.0)).unwrap();
    for r in &n.relays {
        let ch = current_channel(&r.point.branch, r.point.terminal, 0);
        let m = res.metrics(&ch).unwrap();
        ensure(!m.reversal_detected, || format!("spurious reversal at {}", r.id))?;
    }
    let (track, x, time) = flipped_track();
    let m = transient_metrics(&x, &time, &track, 3.0 / 60.0, 1.0 / 60.0).unwrap();
    ensure(m.reversal_detected, || "180° flip not detected".into())?;
    let v2 = PhasorTrack {
        time: track.time.clone(),
        phasors: vec![Complex64::new(1.0, 0.0); track.len()],
    };
    let i2 = PhasorTrack {
        time: track.time.clone(),
        phasors: track.phasors.iter().map(|p| p * Complex64::new(0.0, 1.0)).collect(),
    };
    let (_, flipped) = direction_reversal(&v2, &i2, &DirectionSettings::default(), 3.0 / 60.0, 1.0 / 60.0).unwrap();
    ensure(flipped, || "lead/lag flip not detected".into())?;
    Ok(format!("worst magnitude {:.3}%, worst angle {worst_ang:.3} deg", 100.0 * worst_mag))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("C1 earth-return constant", c1_earth_constant),
        ("C2 sequence diagonalization", c2_sequence_diagonalization),
        ("C3 coupling magnitude", c3_coupling_magnitude),
        ("C4 oracle equivalence", c4_oracle_equivalence),
        ("C5 zero-sequence absence", c5_zero_sequence_absence),
        ("C6 decomposition consistency", c6_decomposition),
        ("C7 table-shape reproduction", c7_table_shape),
        ("C8 distance exactness", c8_distance),
        ("C9 curve math", c9_curve),
        ("C10 pilot truth tables", c10_pilot),
        ("C11 EMT closed form", c11_emt_closed_form),
        ("C12 EMT-phasor cross-validation", c12_cross_validation),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.2} s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} ({secs:.2} s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
