use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("potential is undefined: {0}")]
    UndefinedPotential(String),
    #[error("energy is undefined: {0}")]
    UndefinedEnergy(String),
    #[error("G-ratio is undefined: {0}")]
    UndefinedRatio(String),
    #[error("gradient is singular at coincident points")]
    SingularGradient,
    #[error("integral diverges: {0}")]
    Diverged(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
