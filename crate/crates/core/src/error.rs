use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A size guard (qubit count, enumeration length) was exceeded.
    #[error("resource limit: {what} = {value} exceeds the bound {bound}")]
    ResourceLimit {
        what: &'static str,
        value: u64,
        bound: u64,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
