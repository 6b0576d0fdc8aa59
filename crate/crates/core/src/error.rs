use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("non-canonical ordinal: {0}")]
    NonCanonical(String),

    #[error("ordinal {alpha} is not below the configured ceiling {ceiling}")]
    Ceiling { alpha: String, ceiling: String },

    #[error("{0} is not a limit ordinal")]
    NotLimit(String),

    #[error("{set} is not a member of S_{alpha}")]
    NotMember { alpha: String, set: String },

    #[error("budget exceeded: {what} (limit {limit})")]
    Budget { what: String, limit: u64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
}

impl Error {
    pub fn budget(what: impl Into<String>, limit: u64) -> Self {
        Error::Budget {
            what: what.into(),
            limit,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
