//! Fixtures shared by the benchmarks.

use mcstudy_core::network::{parse_network, Network};

/// Five-bus demonstration network with coupled corridors.
pub fn demo_network() -> Network {
    parse_network(include_str!("../../../data/networks/demo.json")).expect("bundled network parses")
}
