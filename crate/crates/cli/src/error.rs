use std::fmt;

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or input file (exit 2).
    Config(String),
    /// An enumeration or lag budget was exhausted (exit 3).
    Cap(String),
    /// Anything that should not happen on valid input (exit 4).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn config(field: &str, msg: impl fmt::Display) -> Self {
        CliError::Config(format!("{field}: {msg}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Cap(m) => write!(f, "resource cap: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<skewlab::Error> for CliError {
    fn from(e: skewlab::Error) -> Self {
        use skewlab::Error as E;
        match e {
            E::EnumerationCap { .. } | E::Incomplete(_) => CliError::Cap(e.to_string()),
            E::DegenerateSigma(_) | E::NoUsablePoints(_) => CliError::Internal(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
