use std::fmt;

/// Outcome of a failed command; maps onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unknown names or out-of-range parameters (exit 2).
    Usage(String),
    /// Data, I/O or numerical failure (exit 1).
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "usage error: {msg}"),
            Failure::Runtime(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<illumaug::Error> for Failure {
    fn from(e: illumaug::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

pub type CmdResult<T> = std::result::Result<T, Failure>;
