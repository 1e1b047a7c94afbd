use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degree not tabulated: |mu| = {0}")]
    DegreeNotTabulated(usize),

    #[error("degree not supported: k = {0} (max 4)")]
    DegreeNotSupported(usize),

    #[error("dimension below degree: d = {d} < k = {k}")]
    DimensionBelowDegree { d: usize, k: usize },

    #[error("closed form singular at d = {0}; use weingarten oracle")]
    ClosedFormSingular(usize),

    #[error("not unitary: max |U*U - I| = {0:e}")]
    NotUnitary(f64),

    #[error("not hermitian: max |T - T*| = {0:e}")]
    NotHermitian(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no lattice points: dim = {dim}, n = {n}")]
    NoLatticePoints { dim: usize, n: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
