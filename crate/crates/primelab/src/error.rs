use thiserror::Error;

/// Failure classes shared by every fallible operation in this crate.
///
/// * `Domain` — an argument violates a documented precondition (out-of-range
///   index, inadmissible tuple, non-coprime residue, ...).
/// * `Budget` — the requested computation would exceed a documented resource
///   ceiling (sieve size, enumeration count).
/// * `DegenerateWeights` — a weight normalization vanished, so a ratio that
///   the caller asked for does not exist.
/// * `Inconsistency` — an internal dual-route check failed; this always
///   indicates a bug and is never silently swallowed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateWeights(msg.into())
    }
    pub(crate) fn inconsistency(msg: impl Into<String>) -> Self {
        Error::Inconsistency(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
