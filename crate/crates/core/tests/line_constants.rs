mod common;

use mcstudy_core::line_constants::{
    coupling_vs_separation, earth_constant, GeometryFile, LineConstants,
};
use mcstudy_core::EarthModel;

fn geometry(name: &str) -> GeometryFile {
    GeometryFile::load(&common::data_dir().join("geometry").join(format!("{name}.json"))).unwrap()
}

/// Ratio of the inter-circuit zero-sequence mutual to the circuit's own z0.
pub fn same_tower_ratio() -> f64 {
    let g = geometry("double_circuit");
    let lc = LineConstants::compute(&g.geometry, &g.earth, g.transposed).unwrap();
    let z0 = lc.sequence.circuit("C1").unwrap().z0;
    lc.sequence.z0m("C1", "C2").unwrap().norm() / z0.norm()
}

#[test]
fn earth_constant_at_reference_conditions() {
    let k = earth_constant(&EarthModel::default());
    assert!((k - 6.7458).abs() < 1e-3, "{k}");
}

#[test]
fn same_tower_coupling_is_large() {
    let r = same_tower_ratio();
    eprintln!("same tower |z0m|/|z0| = {r}");
    assert!((0.5..=0.7).contains(&r), "{r}");
}

#[test]
fn corridor_coupling_is_smaller_and_decays() {
    let g = geometry("corridor_single");
    let lc = LineConstants::compute(&g.geometry, &g.earth, g.transposed).unwrap();
    let z0 = lc.sequence.circuit("C1").unwrap().z0;
    let seps = [15.0, 30.0, 60.0, 120.0];
    let m = coupling_vs_separation(&g.geometry, &g.geometry, &seps, &g.earth).unwrap();
    let ratios: Vec<f64> = m.iter().map(|(_, z)| z.norm() / z0.norm()).collect();
    eprintln!("corridor ratios {ratios:?}");
    assert!(ratios[1] < same_tower_ratio());
    assert!(ratios.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn transposed_circuits_have_equal_positive_and_negative_sequence() {
    let g = geometry("double_circuit");
    let lc = LineConstants::compute(&g.geometry, &g.earth, true).unwrap();
    for c in &lc.sequence.circuits {
        assert!((c.z1 - c.z2).norm() < 1e-12 * c.z1.norm());
        assert!(c.z0.norm() > 2.0 * c.z1.norm());
    }
    let back = lc.sequence.to_phase();
    for (a, b) in back.iter().zip(lc.phase.entries().iter()) {
        assert!((a - b).norm() < 1e-12);
    }
}
