use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("mixed groups: {0} vs {1}")]
    MixedGroups(String, String),
    #[error("{0} lies outside the resolver support")]
    OutOfSupport(String),
    #[error("schedule construction failed at level {level}: {reason}")]
    Schedule { level: usize, reason: String },
    #[error("capacity exhausted: {0}")]
    Capacity(String),
    #[error("depth limit: {0}")]
    Depth(String),
    #[error("decode failed: {0}")]
    Decode(String),
    #[error("size bound exceeded: {0}")]
    SizeBound(String),
    #[error("assignment not realized: {0}")]
    NotRealized(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
