use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown circle id {0}")]
    UnknownCircle(usize),
    #[error("grid alignment: {0}")]
    Alignment(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("baseline drift: {0}")]
    Drift(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
