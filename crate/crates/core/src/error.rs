use std::fmt;

use thiserror::Error;

/// A syntax error with a 1-based position in the original input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: expected {}, found {}",
            self.line, self.column, self.expected, self.found
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),

    #[error("{line}:{column}: {message}")]
    Dialect {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("malformed knowledge base: {0}")]
    Malformed(String),

    #[error("knowledge base is inconsistent")]
    Inconsistent,

    #[error("{what}: {size} exceeds the enumeration limit of {limit}")]
    GuardExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("individual `{0}` is not mapped to a domain element")]
    UnmappedIndividual(String),

    #[error("concept `{0}` is unsatisfiable under the ranking")]
    InfiniteRank(String),

    #[error("no scenario survives the selection for the combination")]
    CombinationFailure,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
