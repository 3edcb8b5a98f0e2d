use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical routines and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |M - M^dag| = {defect:.3e}, tolerance {tolerance:.3e})")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("eigenvalue {eigenvalue:.6e} lies outside the domain of the matrix function")]
    OutsideDomain { eigenvalue: f64 },

    #[error("Schatten index must be positive, got {0}")]
    InvalidSchattenIndex(f64),

    #[error("inconsistent tensor structure: {0}")]
    InconsistentDims(String),

    #[error("state vector is not normalized (norm {norm:.12})")]
    NotNormalized { norm: f64 },

    #[error("trace is {trace:.12}, expected {expected}")]
    InvalidTrace { trace: f64, expected: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state is not strictly positive (min eigenvalue {min_eigenvalue:.3e}); regularize it first")]
    NotStrictlyPositive { min_eigenvalue: f64 },

    #[error("support of the first argument is not contained in the support of the reference state")]
    SupportViolation,

    #[error("block index {index} out of range for {count} blocks")]
    BlockOutOfRange { index: usize, count: usize },

    #[error("block size {block_size} does not divide lattice size {sites}")]
    NotDivisible { sites: usize, block_size: usize },

    #[error("state is not translation invariant (defect {defect:.3e})")]
    NotTranslationInvariant { defect: f64 },

    #[error("supplied basis does not diagonalize the state (defect {defect:.3e})")]
    BasisMismatch { defect: f64 },

    #[error("unknown Hamiltonian family `{0}`")]
    UnknownFamily(String),

    #[error("missing coupling `{0}`")]
    MissingCoupling(String),

    #[error("energy target {target} lies outside the open spectral range ({min}, {max})")]
    TargetOutOfRange { target: f64, min: f64, max: f64 },

    #[error("energy shell ({low}, {high}] is empty; nearest eigenvalue is {nearest}")]
    EmptyShell { low: f64, high: f64, nearest: f64 },

    #[error("N = {sites} needs Hilbert dimension {dim}, above the memory cap {cap}; pass --allow-large to lift it")]
    MemoryCap { sites: usize, dim: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver failed to converge")]
    EigenFailure,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
