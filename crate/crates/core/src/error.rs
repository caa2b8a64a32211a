use thiserror::Error;

/// Errors raised by tree construction, proofs, and the file formats that carry them.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("EmptyLeaves: a tree needs at least one leaf")]
    EmptyLeaves,
    #[error("InvalidCount: leaf count must be at least 1")]
    InvalidCount,
    #[error("IndexOutOfRange: leaf index {index} is not below leaf count {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("LengthMismatch: tree has {expected} leaves but {actual} were supplied")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid hex digest: {0}")]
    InvalidHex(String),
    #[error("unknown hash mode `{0}` (expected plain or domsep)")]
    UnknownMode(String),
    #[error("unknown tree variant `{0}` (expected trim or traditional)")]
    UnknownVariant(String),
    #[error("malformed tree dump: {0}")]
    MalformedTree(String),
    #[error("malformed proof: {0}")]
    MalformedProof(String),
}
