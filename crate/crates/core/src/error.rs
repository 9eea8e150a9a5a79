use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed experiment request (unknown name, bad config file).
    #[error("usage: {0}")]
    Usage(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("flow `{label}` returned a non-finite value at n = {n}")]
    NonFinite { label: String, n: u64 },

    #[error("flow `{label}` violated its declared bound {bound} at n = {n} (|value| = {value})")]
    BoundViolated {
        label: String,
        n: u64,
        bound: f64,
        value: f64,
    },

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("budget exceeded: {what} needs ~{estimate} operations, limit is {limit}")]
    Budget { what: String, estimate: u128, limit: u128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code: 2 for requests that could not be understood, 1 for
    /// failures while computing.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::InvalidArgument(_) | Error::Json(_) => 2,
            _ => 1,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn range(msg: impl Into<String>) -> Error {
    Error::Range(msg.into())
}
