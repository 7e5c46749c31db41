use thiserror::Error;

/// Errors surfaced by the library.
///
/// Internal invariant violations (e.g. an adversary exceeding its outlier
/// budget, or an elimination step emptying the active set) are bugs, not
/// recoverable conditions, and panic instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("item {item} outside the valid range 1..={n_items}")]
    InvalidItem { item: usize, n_items: usize },

    #[error("ground set of {size} items exceeds the exhaustive-search limit of {limit}")]
    TooLargeForBruteForce { size: usize, limit: usize },

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
}

impl Error {
    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
