use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain a scheme or distribution is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("query index {index} out of range 1..={n}")]
    Range { index: usize, n: usize },

    /// A cell alphabet too small to hold the values a construction stores.
    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    /// A fixing (B, z, X) where some x in X disagrees with z on B.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// Exhaustive work would exceed the desk-scale limit.
    #[error("size error: {what} needs {count} items, limit is {limit}")]
    Size {
        what: String,
        count: u128,
        limit: u128,
    },

    /// A lemma hypothesis that was measured and found not to hold.
    #[error("hypothesis violated: {what} (measured {measured}, required {required})")]
    Hypothesis {
        what: String,
        measured: f64,
        required: f64,
    },

    /// The stretcher sweep found no qualifying index in a window.
    #[error("stretcher stuck: no index in window starting at position {start} (value {value}) satisfies the gap inequality; n = {n} is too small for c = {c}")]
    Stuck {
        start: usize,
        value: usize,
        n: usize,
        c: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
