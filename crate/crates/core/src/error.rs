use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = SbnError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SbnError {
    /// The graph violates a structural requirement (cycle, bad CPD, ...).
    #[error("structural error: {0}")]
    Structural(String),

    /// A strategy profile does not fit the graph it is bound to.
    #[error("binding error: {node} {reason}")]
    Binding { node: NodeId, reason: String },

    /// A finite budget (enumeration support, truncation cap, tree size) was exceeded.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A caller broke an operation's contract.
    #[error("contract error: {0}")]
    Contract(String),

    /// Malformed input document.
    #[error("parse error: {0}")]
    Parse(String),

    /// An internal invariant failed; indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

impl SbnError {
    pub fn structural(msg: impl Into<String>) -> Self {
        SbnError::Structural(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        SbnError::Capacity(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        SbnError::Contract(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        SbnError::Internal(msg.into())
    }
}
