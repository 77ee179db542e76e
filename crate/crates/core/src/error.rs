use thiserror::Error;

/// Failure modes shared by every evaluator in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not converged: {0}")]
    NonConvergent(String),
    #[error("evaluation point coincides with the Laurent center")]
    CenterPole,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
