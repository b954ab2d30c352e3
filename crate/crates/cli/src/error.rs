use std::fmt;

/// Pipeline errors carrying the process exit code: 2 for input problems,
/// 3 for internal verification failures. Exit code 1 (assertion failures)
/// is derived from the report, not from an error.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn at_line(line: usize, msg: impl fmt::Display) -> Self {
        CliError::Input(format!("line {line}: {msg}"))
    }

    /// Wrap an engine error with context; verification failures and
    /// degenerate point sets indicate internal bugs.
    pub fn engine(context: &str, e: noether_core::Error) -> Self {
        match e {
            noether_core::Error::VerificationFailure(_) | noether_core::Error::DegeneratePointSet(_) => {
                CliError::Internal(format!("{context}: {e}"))
            }
            _ => CliError::Input(format!("{context}: {e}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
