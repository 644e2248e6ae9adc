use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("safe set exceeds the enumeration cap of {cap} points")]
    ResourceLimit { cap: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported step schedule: {0}")]
    UnsupportedSchedule(String),

    #[error("safe set was built for a different model (fingerprint {expected:#x}, found {found:#x})")]
    ModelMismatch { expected: u64, found: u64 },

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
