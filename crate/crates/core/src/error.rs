use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("unknown vertex id {0:?}")]
    UnknownVertex(String),
    #[error("graph is disconnected; unreachable component: {0:?}")]
    Disconnected(Vec<String>),
    #[error("nonpositive {field} at {location}")]
    NonPositive { field: &'static str, location: String },
    #[error("target unreachable from source")]
    Unreachable,
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
