use thiserror::Error;

use crate::field::Staggering;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value in {field} at (i={i}, j={j})")]
    NonFinite { field: String, i: usize, j: usize },

    #[error("expected {expected:?} staggering, got {found:?}")]
    Staggering {
        expected: Staggering,
        found: Staggering,
    },

    #[error("CFL violation: courant number {courant:.4} exceeds {limit}; dt must be <= {required_dt:e}")]
    Cfl {
        courant: f64,
        limit: f64,
        required_dt: f64,
    },

    #[error("{solver} did not converge: residual {residual:e} after {iterations} iterations (tol {tol:e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    #[error("incompatible right-hand side: weighted mean {mean:e} is not zero")]
    Incompatible { mean: f64 },

    #[error("density out of range at (i={i}, j={j}): {value}")]
    Density { i: usize, j: usize, value: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::Cfl { .. }
                | Error::NotConverged { .. }
                | Error::Density { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
