use thiserror::Error;

/// Errors raised by model construction, enumeration, and evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid term {id}: {reason}")]
    InvalidTerm { id: usize, reason: String },

    #[error("invalid hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("invalid product state: {0}")]
    InvalidState(String),

    #[error("dimension {needed} exceeds the configured cap {cap}")]
    CapExceeded { needed: usize, cap: usize },

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("incompatibility graph is disconnected")]
    DisconnectedGraph,

    #[error("graph with {vertices} vertices exceeds the Ursell cap {cap}")]
    UrsellCap { vertices: usize, cap: usize },

    #[error("logarithm branch undefined: |Z| = {modulus:e} at beta = {re}{im:+}i")]
    Branch { modulus: f64, re: f64, im: f64 },

    #[error("time step {dt} violates the sampling limit {limit}; try dt = {suggested}")]
    Nyquist { dt: f64, limit: f64, suggested: f64 },

    #[error("distribution has zero variance")]
    ZeroVariance,

    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),
}

pub type Result<T> = std::result::Result<T, Error>;
