use thiserror::Error;

/// Errors produced anywhere in the compiler core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Pauli label `{label}`: {reason}")]
    PauliParse { label: String, reason: String },

    #[error("arity mismatch: {context} (expected {expected} qubits, found {found})")]
    ArityMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("{qubits} qubits exceeds the dense-simulation cap of {cap}")]
    CapExceeded { qubits: usize, cap: usize },

    #[error("block-encoding `{handle}` carries no dense matrix")]
    MissingMatrix { handle: String },

    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Hamiltonian is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
