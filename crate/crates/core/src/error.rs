use thiserror::Error;

/// Errors raised by the library. Variants map onto the CLI exit-code classes.
#[derive(Debug, Error)]
pub enum Error {
    /// Mismatched lengths or dimensions between related objects.
    #[error("structural error: {0}")]
    Structural(String),

    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs that are formally valid but leave nothing to work with.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("training points are not affinely independent (rank {rank}, need {needed})")]
    RankDeficient { rank: usize, needed: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("sample generation stalled: {accepted} accepted out of {attempts} attempts")]
    Stall { accepted: usize, attempts: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
