use thiserror::Error;

/// Every failure the library can report.
///
/// The variants are grouped by how a caller should react: `Argument`,
/// `Model` and `Invariant` are validation failures, `Resource` is a guard
/// tripping, and `Range`/`Resolution` mean a finite window was too small
/// for the requested computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("unsupported feature: {0}")]
    Unsupported(String),

    #[error("coordinates [{lo}, {hi}] are outside the available range [{have_lo}, {have_hi}]")]
    Range {
        lo: i64,
        hi: i64,
        have_lo: i64,
        have_hi: i64,
    },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("resource guard: {0}")]
    Resource(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
