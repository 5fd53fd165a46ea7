use thiserror::Error;

/// Harness failures, each with a process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad configuration or unreadable input (exit 2).
    #[error("config error: {0}")]
    Config(String),
    /// An enumeration or search budget was exceeded (exit 3).
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// Writing results failed (exit 1).
    #[error("io error: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Budget(_) => 3,
            HarnessError::Io(_) => 1,
        }
    }

    pub fn from_core(e: localtest_core::Error) -> Self {
        match e {
            localtest_core::Error::Budget(m) => HarnessError::Budget(m),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

impl From<localtest_core::Error> for HarnessError {
    fn from(e: localtest_core::Error) -> Self {
        HarnessError::from_core(e)
    }
}
