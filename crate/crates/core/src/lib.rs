//! Zero-sequence mutual coupling analysis for parallel transmission circuits.
//!
//! The crate covers the full study chain:
//!
//! * [`line_constants`]: Carson impedances from tower geometry, ground-wire
//!   elimination and the symmetrical-component image including the
//!   inter-circuit zero-sequence mutual `z0m`.
//! * [`network`]: the per-unit short-circuit network with mutual coupling
//!   records, relay settings and its JSON file format.
//! * [`fault`]: sequence-network assembly with coupled zero-sequence branch
//!   groups and SLG/LLG/LL/3PH fault solution.
//! * [`relay`]: directional ground overcurrent, mho distance and POTT/DCB
//!   pilot logic.
//! * [`study`]: with/without-coupling sweeps, line-end-open studies, reach
//!   studies and report rendering.
//! * [`emt`]: lumped coupled-RL time-domain simulation, sliding DFT phasors
//!   and overshoot/reversal metrics.

pub mod emt;
pub mod error;
pub mod fault;
pub mod line_constants;
pub mod linalg;
pub mod network;
pub mod relay;
pub mod seq;
pub mod study;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use fault::{FaultKind, FaultLocation, FaultSolution, FaultSpec};
pub use line_constants::{
    ConductorSpec, EarthModel, PhaseImpedanceMatrix, SequenceImpedanceSet, TowerGeometry,
};
pub use network::{Branch, BranchStatus, MutualCoupling, Network, RelayPoint, Terminal};
pub use relay::{Direction, TripReason, TripResult, NO_TRIP};
pub use study::{StudyReport, ReportFormat};
