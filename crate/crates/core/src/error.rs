use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("arithmetic overflow: {0}")]
    ArithmeticOverflow(String),

    #[error("positivity violation: {0}")]
    PositivityViolation(String),

    #[error("resource limit: estimated {estimated} scalar multiplications exceeds guard {limit} (pass --force to override)")]
    ResourceLimit { estimated: u128, limit: u64 },

    #[error("malformed graph: {0}")]
    MalformedGraph(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("mode mixing: {0}")]
    ModeMixing(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
