//! Test-only oracles built without the sequence-domain machinery.
#![allow(dead_code)]

pub mod emt_fixtures;
pub mod oracle;
pub mod phase;

use std::path::PathBuf;

use mcstudy_core::network::{load_network, Network};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn network(name: &str) -> Network {
    load_network(&data_dir().join("networks").join(format!("{name}.json"))).unwrap()
}

/// Networks with at most six buses and at least one coupled pair.
pub const ORACLE_NETWORKS: &[&str] = &[
    "demo",
    "additive",
    "subtractive",
    "oracle_radial_pair",
    "oracle_grounded_oos",
    "oracle_open_partial",
    "oracle_mixed_angles",
];
