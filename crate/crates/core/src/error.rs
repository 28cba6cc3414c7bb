use thiserror::Error;

use crate::basis::SeedTag;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("numeric error{}: {msg}", tag.map(|t| format!(" (realization {} of seed {})", t.index, t.master_seed)).unwrap_or_default())]
    Numeric { msg: String, tag: Option<SeedTag> },

    #[error("state error: {0}")]
    State(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("resource error: {0}")]
    Resource(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("{failed} of {total} realizations failed, above the 1% threshold")]
    FailureThreshold { failed: usize, total: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn with_tag(self, tag: SeedTag) -> Self {
        match self {
            Error::Numeric { msg, .. } => Error::Numeric { msg, tag: Some(tag) },
            other => other,
        }
    }
}
