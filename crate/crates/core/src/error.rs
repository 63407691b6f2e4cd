use thiserror::Error;

use crate::valuation::Calculus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Ill-formed domain relationship: projecting to a non-subset, unknown
    /// variable, overlapping query sets and similar.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("calculus mismatch: {0} vs {1}")]
    CalculusMismatch(Calculus, Calculus),

    /// Removing a valuation that assigns zero weight to a configuration the
    /// other operand still supports.
    #[error("inconsistent removal at configuration index {index}")]
    InconsistentRemoval { index: usize },

    /// Belief-function removal divides by a commonality value that is zero.
    #[error("removal undefined: zero commonality for subset mask {mask:#x}")]
    RemovalUndefined { mask: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("capacity exceeded: {needed} > {limit}")]
    Capacity { needed: u64, limit: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// True for the two removal failures, which audits treat as skips rather
    /// than defects.
    pub fn is_removal_failure(&self) -> bool {
        matches!(
            self,
            Error::InconsistentRemoval { .. } | Error::RemovalUndefined { .. }
        )
    }
}
