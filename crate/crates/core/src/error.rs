use thiserror::Error;

use crate::seq::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("index {index} is past the end of a finite sequence of length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("index {index} is past the declared bound {bound} of a stream")]
    StreamExhausted { index: usize, bound: usize },

    #[error("a sequence needs at least one sign")]
    EmptySequence,

    #[error("a periodic block needs at least one sign")]
    EmptyPeriod,

    #[error("a stream has no closed form; print it with an explicit truncation length")]
    StreamNotPrintable,

    #[error("{0}")]
    Domain(String),

    #[error("needs {needed} bits of precision, only {available} available")]
    InsufficientPrecision { needed: u32, available: u32 },

    #[error("negative radicand at nesting level {level}: arithmetic bug")]
    NegativeRadicand { level: usize },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Parse(_) => 2,
            Error::NegativeRadicand { .. } | Error::Invariant(_) => 4,
            _ => 3,
        }
    }
}
