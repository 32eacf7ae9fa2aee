//! Error type shared by all core operations.

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("operator dimension must be at least 1")]
    ZeroDimension,
    #[error("entry count {got} does not match dim {dim} (expected {})", dim * dim)]
    BadEntryCount { dim: usize, got: usize },
    #[error("matrix is not Hermitian: max |A[i,j] - conj(A[j,i])| = {deviation:.3e} exceeds 1e-12 relative to max entry {scale:.3e}")]
    NotHermitian { deviation: f64, scale: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("total dimension {dim} is not a perfect square of subsystem dim {sub}")]
    NotBipartite { dim: usize, sub: usize },
    #[error("scalar function undefined at eigenvalue {eigenvalue:.6e}")]
    DomainError { eigenvalue: f64 },
    #[error("operator is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e} < -1e-10")]
    NotPsd { min_eigenvalue: f64 },
    #[error("state vector has zero norm")]
    ZeroNorm,
    #[error(
        "truncated coherent state carries norm {norm:.3e} < 1e-8; increase the Fock dimension"
    )]
    TruncationLoss { norm: f64 },
    #[error("covariance matrix violates the uncertainty principle (det V = {det:.6e} < 1/4) or is not SPD")]
    InvalidCovariance { det: f64 },
    #[error("parameter {name} = {value} out of range")]
    ParamOutOfRange { name: &'static str, value: f64 },
    #[error("{0}")]
    InvalidInput(String),
    #[error("instance failed validation: {0}")]
    InvalidInstance(String),
    #[error("epsilon ladder must be strictly descending and positive")]
    BadLadder,
    #[error("transportation oracle supports n <= 6, got {n}")]
    OracleTooLarge { n: usize },
    #[error("objective not finite at the initial point")]
    NonFiniteObjective,
    #[error("solver configuration invalid: {0}")]
    BadConfig(&'static str),
}
