use num_complex::Complex64;
use serde::Serialize;

use super::{solve_fault, FaultSpec};
use crate::error::{Error, Result};
use crate::network::{Network, RelayPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Additive,
    Subtractive,
}

/// Relay 3I0 split into the part driven by the fault itself and the part
/// induced through zero-sequence mutuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub fault_based: Complex64,
    pub induced: Complex64,
    pub polarity: Polarity,
}

impl Decomposition {
    pub fn with_coupling(&self) -> Complex64 {
        self.fault_based + self.induced
    }
}

pub fn decompose_3i0(n: &Network, f: &FaultSpec, relay: &RelayPoint) -> Result<Decomposition> {
    if !f.kind.involves_ground() {
        return Err(Error::UnsupportedDecomposition(f.kind));
    }
    let residual = |mc: bool| -> Result<Complex64> {
        let s = solve_fault(n, &f.clone().with_coupling(mc))?;
        s.measure(relay).map(|p| p.residual()).ok_or_else(|| Error::Unknown {
            kind: "relay point",
            id: format!("{}:{:?}", relay.branch, relay.terminal),
        })
    };
    let fault_based = residual(false)?;
    let with = residual(true)?;
    let induced = with - fault_based;
    let polarity = if with.norm() > fault_based.norm() {
        Polarity::Additive
    } else {
        Polarity::Subtractive
    };
    Ok(Decomposition {
        fault_based,
        induced,
        polarity,
    })
}
