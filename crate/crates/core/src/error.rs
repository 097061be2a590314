use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("support must lie in [0, 1), got {0}")]
    Support(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("record has {found} attributes, expected {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("attribute index {index} out of range for {arity} attributes")]
    AttributeOutOfRange { index: usize, arity: usize },
    #[error("attribute {index} is missing")]
    MissingCell { index: usize },
    #[error("attribute {index}: {reason}")]
    KindMismatch { index: usize, reason: String },
    #[error("average over an empty set of records is undefined")]
    EmptySet,
    #[error("cluster is empty")]
    EmptyCluster,
    #[error("need at least {k} distinct records, found {distinct}")]
    TooFewDistinct { k: usize, distinct: usize },
    #[error("input lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no records to evaluate")]
    EmptyInput,
}
