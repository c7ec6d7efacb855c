use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A zero or negative distance, or a distance gap that makes the precision formula diverge.
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("invalid edge ({j}, {k}) for an instance of {n} cities")]
    InvalidEdge { j: usize, k: usize, n: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid size: n = {n}, at least {min} cities required")]
    InvalidSize { n: usize, min: usize },

    #[error("{context}: n = {n} exceeds cap {cap}")]
    TooLarge {
        context: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical underflow: post-selection success probability {0:e} below 1e-300")]
    NumericalUnderflow(f64),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
