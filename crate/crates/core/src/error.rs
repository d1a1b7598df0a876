use thiserror::Error;

/// Errors produced while building or running a scheduling scenario.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("matrix of order {0} is too large for exhaustive minor enumeration (max 20)")]
    MatrixTooLarge(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
