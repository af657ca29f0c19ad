//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolymerError {
    /// A mathematical precondition was violated (negative time, unordered
    /// interval, Hurst index outside (0,1), ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A run configuration failed validation before any computation started.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A covariance matrix failed its positive-semidefiniteness check beyond
    /// the documented tolerance, even after the single permitted diagonal
    /// jitter of 1e-12.
    #[error("covariance matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: estimated error {estimated:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergence { estimated: f64, tolerance: f64 },

    /// Exhaustive enumeration would exceed the desk-scale guard.
    #[error("enumeration of {size} paths exceeds the guard of {guard}")]
    EnumerationGuard { size: u128, guard: u128 },

    /// The environment box cannot contain every site the walk can reach.
    #[error("box radius {radius} is too small: the walk can reach sup-norm distance {reach}")]
    BoxTooSmall { radius: usize, reach: usize },

    /// A path refers to a jump time that does not lie on the environment grid,
    /// or to a site outside the environment box.
    #[error("path is incompatible with the environment grid: {0}")]
    OffGrid(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for PolymerError {
    fn from(e: serde_json::Error) -> Self {
        PolymerError::Serialization(e.to_string())
    }
}

impl From<csv::Error> for PolymerError {
    fn from(e: csv::Error) -> Self {
        PolymerError::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PolymerError>;
