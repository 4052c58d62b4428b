use thiserror::Error;

use crate::sources::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid source: {}", format_violations(.0))]
    InvalidSource(Vec<Violation>),

    #[error("letter {letter} at position {position} is outside the alphabet 1..={size}")]
    LetterOutOfRange {
        position: usize,
        letter: usize,
        size: usize,
    },

    #[error("word length {got} does not match expected length {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation not supported for this source: {0}")]
    Unsupported(String),

    #[error("{what} exceeds cap: {needed} > {cap}; {hint}")]
    CapExceeded {
        what: &'static str,
        needed: f64,
        cap: u64,
        hint: &'static str,
    },

    #[error("rank {0} is out of range")]
    RankOutOfRange(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
