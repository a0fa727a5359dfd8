use std::fmt;
use std::path::Path;
use std::process::ExitCode;

/// Stable process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INVALID: u8 = 1;
    pub const IO: u8 = 2;
    pub const BUDGET_PARTIAL: u8 = 3;
    pub const WITNESS_FOUND: u8 = 4;
    pub const INCONCLUSIVE: u8 = 5;
    pub const REPRODUCE_MISMATCH: u8 = 6;
}

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Io(String),
    Core(permorb_core::Error),
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Invalid(_) | CliError::Core(_) => exit::INVALID,
            CliError::Io(_) => exit::IO,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for CliError {}

impl From<permorb_core::Error> for CliError {
    fn from(e: permorb_core::Error) -> Self {
        CliError::Core(e)
    }
}
