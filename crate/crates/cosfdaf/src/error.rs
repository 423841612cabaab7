use thiserror::Error;

/// Errors reported by filter construction, signal generation, experiment
/// configuration, and experiment runs.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its valid range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Paired buffers whose lengths must agree did not.
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A configuration file could not be parsed.
    #[error("config error: {0}")]
    Config(String),

    /// A filter state or output became non-finite during a run.
    #[error("{algorithm} diverged at block {block}")]
    Divergence { algorithm: String, block: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn dim(what: &'static str, expected: usize, actual: usize) -> Error {
    Error::DimensionMismatch {
        what,
        expected,
        actual,
    }
}
