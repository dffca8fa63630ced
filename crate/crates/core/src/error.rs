use crate::farey::FareyFraction;
use num_complex::Complex64;
use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular argument: {what} = {value}")]
    Singular { what: &'static str, value: Complex64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("reducible case: mu = {0} is within 1e-12 of 4")]
    Reducible(Complex64),
    #[error("non-finite input")]
    NonFinite,
    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(Complex64),
    #[error("subtree is not connected")]
    Disconnected,
    #[error("branch cannot be summed directly: {0}; refine with attracting_subtree")]
    Decomposition(String),
    #[error("identity not applicable: {reason}")]
    Inapplicable {
        reason: String,
        witness: Option<(FareyFraction, Complex64)>,
    },
    #[error("inconclusive within budget: {0}")]
    Inconclusive(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
