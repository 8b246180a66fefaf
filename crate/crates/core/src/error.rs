use thiserror::Error;

use crate::space::Label;

/// Errors raised by the finite and Gaussian backends.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("space mismatch in {context}")]
    SpaceMismatch { context: &'static str },

    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("a finite space needs at least one point")]
    EmptySpace,

    #[error("duplicate label {0}")]
    DuplicateLabel(Label),

    #[error("unknown label {0}")]
    UnknownLabel(Label),

    #[error("negative weight {value} at {label}")]
    NegativeWeight { label: Label, value: f64 },

    #[error("weights sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),

    #[error("space is not a binary product")]
    NotProduct,

    #[error("not absolutely continuous: positive mass at {witness} where the reference measure vanishes")]
    NotAbsolutelyContinuous { witness: Label },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix to invert is singular or ill-conditioned (condition estimate {condition:e}, bound {bound:e})")]
    IllConditioned { condition: f64, bound: f64 },

    #[error("grid rejected: {0}")]
    BadGrid(String),

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("malformed document: {0}")]
    Schema(String),
}

impl Error {
    /// True for errors that come from numerical conditioning rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPsd { .. } | Error::IllConditioned { .. } | Error::NotSymmetric { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
