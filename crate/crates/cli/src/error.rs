use std::fmt;

/// Failures mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration (exit 2).
    Config {
        line: Option<usize>,
        message: String,
    },
    /// A solver produced or met non-finite values (exit 3).
    Numeric {
        method: String,
        index: Option<usize>,
        message: String,
    },
    /// Output could not be written (exit 3).
    Io(std::io::Error),
    /// `verify` found violated invariants (exit 1).
    Checks(Vec<String>),
}

impl CliError {
    pub fn config(line: Option<usize>, message: String) -> Self {
        Self::Config { line, message }
    }

    pub fn numeric(method: &str, err: qdecay_core::Error) -> Self {
        let index = match err {
            qdecay_core::Error::NonFinite { index, .. } => Some(index),
            _ => None,
        };
        Self::Numeric {
            method: method.to_string(),
            index,
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Checks(_) => 1,
            Self::Config { .. } => 2,
            Self::Numeric { .. } | Self::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config {
                line: Some(l),
                message,
            } => write!(f, "config error at line {l}: {message}"),
            Self::Config {
                line: None,
                message,
            } => write!(f, "config error: {message}"),
            Self::Numeric {
                method,
                index: Some(i),
                message,
            } => {
                write!(
                    f,
                    "numeric failure in {method} at time index {i}: {message}"
                )
            }
            Self::Numeric {
                method,
                index: None,
                message,
            } => write!(f, "numeric failure in {method}: {message}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
            Self::Checks(names) => write!(f, "failed checks: {}", names.join(", ")),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}
