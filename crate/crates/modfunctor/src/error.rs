//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("axiom violation: {axiom} (residual {residual:.3e})")]
    AxiomViolation { axiom: String, residual: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-integral fusion coefficient N[{i}][{j}][{k}] = {value}")]
    NonIntegralCoefficient {
        i: usize,
        j: usize,
        k: usize,
        value: f64,
    },

    #[error("fusion mismatch at N[{i}][{j}][{k}]: declared {declared}, computed {computed}")]
    FusionMismatch {
        i: usize,
        j: usize,
        k: usize,
        declared: u64,
        computed: u64,
    },

    #[error("unstable pair (g, n) = ({genus}, {legs})")]
    UnstablePair { genus: u32, legs: usize },

    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),

    #[error("length mismatch: expected vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("diagonalization failure: off-diagonal residual {0:.3e}")]
    DiagonalizationFailure(f64),

    #[error("truncation {requested} exceeds maximum graded degree {max}")]
    TruncationTooLarge { requested: usize, max: usize },

    #[error("sewing identity violated at degree {degree}, basis index {basis}")]
    IdentityViolation { degree: usize, basis: usize },

    #[error("unknown label name: {0}")]
    UnknownLabel(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
