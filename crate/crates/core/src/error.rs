use std::path::PathBuf;

use thiserror::Error;

use crate::fault::FaultKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("kron reduction failed: ground-wire block is singular (conductors {conductors:?})")]
    SingularReduction { conductors: Vec<usize> },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("{}: parse error at line {line}, column {column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dangling reference: {kind} `{id}` is not defined")]
    DanglingReference { kind: &'static str, id: String },

    #[error("invalid network: {}", format_violations(.0))]
    Invalid(Vec<crate::network::Violation>),

    #[error("unknown {kind} `{id}`")]
    Unknown { kind: &'static str, id: String },

    #[error("physically infeasible coupling `{record}`: {detail}")]
    InfeasibleCoupling { record: String, detail: String },

    #[error("no fault current: bus `{0}` has no path to a source")]
    NoFaultCurrent(String),

    #[error("3I0 decomposition needs a ground fault, got {0}")]
    UnsupportedDecomposition(FaultKind),

    #[error("no measurement: loop current {magnitude:.3e} pu below threshold")]
    NoMeasurement { magnitude: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("EMT solver diverged at step {step}: {detail}")]
    Divergence { step: usize, detail: String },

    #[error("metrics undefined: {0}")]
    MetricsUndefined(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn format_violations(v: &[crate::network::Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
