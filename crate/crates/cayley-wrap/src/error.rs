use thiserror::Error;

/// Errors raised across the crate.
///
/// The CLI maps these to exit codes: parse errors exit 1, contract
/// violations exit 2, numeric/branch failures exit 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("branch error: {0}")]
    Branch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn branch(msg: impl Into<String>) -> Self {
        Error::Branch(msg.into())
    }
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Exit code the CLI reports for this error kind.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) => 1,
            Error::Contract(_) => 2,
            Error::Numeric(_) | Error::Branch(_) => 3,
        }
    }
}
