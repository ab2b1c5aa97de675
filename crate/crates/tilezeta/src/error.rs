use thiserror::Error;

/// Library-wide error type.
///
/// `Validation` carries the same per-rule messages that a
/// [`crate::substitution::ValidationReport`] would list; operations with a
/// validity precondition return it when handed a broken system instead of
/// panicking. `Internal` marks a violated self-consistency check (a bug or an
/// input outside the supported fragment), not a user mistake.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("substitution is not primitive: {0}")]
    NotPrimitive(String),

    #[error("degenerate substitution: {0}")]
    Degenerate(String),

    #[error("factor cap exceeded: {0}")]
    FactorCap(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("window unreachable from phase: {0}")]
    WindowUnreachable(String),

    #[error("enumeration cap exceeded: {0}")]
    CycleCap(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
