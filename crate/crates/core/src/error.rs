use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A constructor argument broke a type invariant.
    InvalidInput(String),
    /// A parameter outside an operation's domain (t ≤ 0, p < 1, ...).
    OutOfDomain(String),
    /// The inequality's right-hand side vanishes while the left-hand side does not.
    MalformedInput(String),
    /// Two inputs that must share a grid do not.
    DomainMismatch(String),
    /// Mode and parameters do not fit together (e.g. weak Sobolev with p ≥ n).
    ModeMismatch(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::OutOfDomain(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::OutOfDomain(m) => write!(f, "argument out of domain: {m}"),
            Error::MalformedInput(m) => write!(f, "malformed input: {m}"),
            Error::DomainMismatch(m) => write!(f, "domain mismatch: {m}"),
            Error::ModeMismatch(m) => write!(f, "mode/parameter mismatch: {m}"),
        }
    }
}

impl core::error::Error for Error {}
