use thiserror::Error;

/// Errors raised by the simulation kernel and the protocol harness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Inputs that violate a construction or dimension contract.
    #[error("configuration error: {0}")]
    Config(String),

    /// A protocol phase was invoked before its prerequisites completed.
    #[error("protocol order violation: {attempted} attempted while in phase {current}")]
    ProtocolOrder { attempted: &'static str, current: &'static str },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
