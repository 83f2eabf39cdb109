use thiserror::Error;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request would exceed a configured work or memory budget.
    #[error("resource limit exceeded: {what} (budget {budget})")]
    Resource { what: String, budget: u64 },
    /// A bounded search ran out of attempts without finding a witness.
    #[error("not found: {0}")]
    NotFound(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, budget: u64) -> Self {
        Error::Resource {
            what: what.into(),
            budget,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
