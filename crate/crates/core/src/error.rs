use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A coordinate or location fell outside its allowed range.
    #[error("out of range: {0}")]
    Range(String),

    /// Two arrays (or an array and a window/pattern) disagree on shape.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A caller-supplied argument violated an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The alphabet lacks a capability the property or engine needs
    /// (ordering, integer arithmetic, or an explicit finite symbol set).
    #[error("missing capability: {0}")]
    Capability(String),

    /// An exhaustive search would exceed its configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// Malformed input file.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
