use thiserror::Error;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Math,
    Precision,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("incompatible operands: {0}")]
    Mismatch(String),
    #[error("division by an element indistinguishable from zero")]
    DivisionByZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("outside the convergence domain: {0}")]
    Domain(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("resonant obstruction at degree {index}: residual {residual}")]
    Resonance { index: usize, residual: String },
    #[error("near resonance at degree {index}: {detail}")]
    NearResonance { index: usize, detail: String },
    #[error("scalar extension needed: {0}")]
    NeedsExtension(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput(_) | Error::Mismatch(_) => ErrorKind::Input,
            Error::PrecisionExhausted(_) | Error::NearResonance { .. } | Error::DivisionByZero => ErrorKind::Precision,
            _ => ErrorKind::Math,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
