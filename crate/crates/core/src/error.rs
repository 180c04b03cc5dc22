use thiserror::Error;

use crate::forest::{Index, OpKind};

pub type Result<T, E = LhfError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("element {0} is smaller than its predecessor")]
    Unsorted(usize),
    #[error("element {0} duplicates its predecessor")]
    Duplicate(usize),
    #[error("element {0} repeats the key of its predecessor")]
    DuplicateKey(usize),
    #[error("element {position} carries {found} children, expected {expected}")]
    Arity {
        position: usize,
        expected: usize,
        found: usize,
    },
    #[error("element {0} has only empty children")]
    EmptyChildren(usize),
    #[error("child index {index} at element {position} is not registered in its child forest")]
    DanglingChild { position: usize, index: Index },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LhfError {
    #[error("index {0} is not registered")]
    InvalidIndex(Index),
    #[error("set {0} is evicted")]
    Evicted(Index),
    #[error("set {0} is evicted and has no recorded producing operation")]
    UnrecoverableEviction(Index),
    #[error("the empty set cannot be evicted")]
    EvictEmpty,
    #[error("invalid property set: {0}")]
    Validation(#[from] ValidationError),
    #[error("unknown forest handle {0}")]
    UnknownForest(usize),
    #[error("forest {forest} does not provide {kind}")]
    UnsupportedOperation { forest: usize, kind: OpKind },
    #[error("construction mismatch: {0}")]
    ConstructionMismatch(String),
}
