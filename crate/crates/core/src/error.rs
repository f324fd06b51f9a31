use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input failed a structural check (Hermiticity, unitarity, normalization, NaN).
    #[error("validation failed: {what} (deviation {deviation:e})")]
    Validation { what: &'static str, deviation: f64 },

    /// A time or angle outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A physical invariant of a computed cycle was violated beyond tolerance.
    #[error("invariant `{name}` violated: residual {residual:e} exceeds {tolerance:e}")]
    Invariant {
        name: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("objective error: {0}")]
    Objective(String),
}

impl Error {
    pub(crate) fn validation(what: &'static str, deviation: f64) -> Self {
        Error::Validation { what, deviation }
    }

    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::Invariant { .. } | Error::Validation { .. })
    }
}
