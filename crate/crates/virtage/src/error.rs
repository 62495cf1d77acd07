//! Crate-wide error type.

/// Everything that can go wrong across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid argument or parameter (nonpositive rate, probability outside
    /// its range, negative age, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An evaluation grid with fewer than two points.
    #[error("grid too small: {0}")]
    GridTooSmall(String),

    /// A kernel was queried with a history of the wrong length, or two
    /// kernels with incompatible arities were composed.
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    /// A kernel was queried outside its declared history domain.
    #[error("history outside kernel domain: {0}")]
    OutsideDomain(String),

    /// The operation needs a deterministic repair policy.
    #[error("unsupported policy: {0}")]
    UnsupportedPolicy(String),

    /// The checker applies to a different virtual-age rule.
    #[error("wrong model: {0}")]
    WrongModel(String),

    /// Requested mode or parameter combination is not implemented.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Two internal computation paths that must agree did not.
    #[error("internal consistency: {0}")]
    Inconsistency(String),

    /// Configuration file or flag problem.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
