use thiserror::Error;

use crate::words::BinWord;

/// Errors raised by word, tree and measure operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index {index} out of range for word of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("beyond horizon: {node} needs the tree past depth {depth}")]
    BeyondHorizon { node: BinWord, depth: usize },
    #[error("not a node: {0}")]
    NotANode(BinWord),
    #[error("tree is not perfect (witness {0})")]
    NotPerfect(BinWord),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("witness not found at node {0}")]
    WitnessNotFound(BinWord),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
}

impl Error {
    /// Short machine-readable tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::IndexOutOfRange { .. } => "index-out-of-range",
            Error::LengthMismatch(_) => "length-mismatch",
            Error::InvalidPresentation(_) => "invalid-presentation",
            Error::BeyondHorizon { .. } => "horizon",
            Error::NotANode(_) => "not-a-node",
            Error::NotPerfect(_) => "not-perfect",
            Error::Unsupported(_) => "unsupported",
            Error::WitnessNotFound(_) => "witness-not-found",
            Error::Integrity(_) => "integrity",
            Error::CapExceeded(_) => "cap-exceeded",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
