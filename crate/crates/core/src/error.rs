use thiserror::Error;

/// Errors raised by the curvature toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    Dimension {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("invalid input: {0}")]
    Input(String),

    /// A metric or endomorphism failed one of its structural invariants.
    #[error("validation failed: {0}")]
    Validation(String),

    /// The two flag vectors are (numerically) linearly dependent, or the
    /// supplied pair is not orthonormal where that is required.
    #[error("degenerate flag: {0}")]
    Flag(String),

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A check required by the requested computation did not pass.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(v: usize, expected: usize, context: &'static str) -> Result<()> {
    if v != expected {
        return Err(Error::Dimension {
            expected,
            got: v,
            context,
        });
    }
    Ok(())
}
