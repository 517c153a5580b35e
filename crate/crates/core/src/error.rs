use std::path::PathBuf;

/// Errors raised by the rate, entropy and code-construction routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular channel: {0}")]
    Singular(String),

    #[error("unphysical Gaussian state: {0}")]
    Unphysical(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("hn·d_v = {hn}·{d_v} is not divisible by d_c = {d_c}; nearest feasible hn is {suggested}")]
    Divisibility {
        hn: usize,
        d_v: usize,
        d_c: usize,
        suggested: usize,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CRS data: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
