use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value count {found} does not match shape {shape:?} (expected {expected})")]
    LengthMismatch {
        shape: Vec<usize>,
        expected: usize,
        found: usize,
    },

    #[error("invalid shape {0:?}: order must be >= 1 and every dimension >= 1")]
    InvalidShape(Vec<usize>),

    #[error("mode {mode} out of range for tensor of order {order}")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid mode partition: {0}")]
    InvalidPartition(String),

    #[error("invalid mode pairing: {0}")]
    InvalidPairing(String),

    #[error("expected a tensor of order {expected}, got order {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("tensor is not a hypercube: shape {0:?}")]
    NotHypercube(Vec<usize>),

    #[error("input is not symmetric (max deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("requested rank {rank} exceeds dimension {dim} at mode {mode}")]
    RankTooLarge {
        mode: usize,
        rank: usize,
        dim: usize,
    },

    #[error("slices {first} and {second} do not commute (relative commutator {residual:e})")]
    NonCommuting {
        first: usize,
        second: usize,
        residual: f64,
    },

    #[error("non-finite value encountered at step {step}")]
    NonFinite { step: usize },

    #[error("{0} did not converge within {1} sweeps")]
    NoConvergence(&'static str, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),
}
