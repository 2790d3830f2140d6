//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("eigendecomposition did not converge for dim {dim} after {iterations} iterations")]
    EigDidNotConverge { dim: usize, iterations: usize },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("matrix is not positive definite (failed at pivot {pivot})")]
    NotPd { pivot: usize },

    #[error("singular linear system")]
    Singular,

    #[error("SDP solve failed: {status:?} after {iterations} iterations ({context})")]
    SdpFailed {
        status: crate::sdp::SdpStatus,
        iterations: usize,
        context: String,
    },

    #[error("SINR targets are infeasible for any relay beamformer")]
    InfeasibleTargets,

    #[error("bisection bracket expansion failed: {0}")]
    BracketFailure(String),

    #[error("rank-one extraction requires a nonzero matrix")]
    ZeroMatrix,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("utility is not strictly increasing (coordinate {coordinate})")]
    NotMonotone { coordinate: usize },

    #[error("polyblock vertex set exceeded cap of {cap}")]
    VertexOverflow { cap: usize },

    #[error("{stage} subproblem failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
