use std::fmt;

use nphmm::Error;

/// Process exit codes.
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// A failed command: message plus the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERIC, message: message.into() }
    }

    /// Wraps a library error raised while handling `context` (usually a flag).
    pub fn from_core(context: &str, err: Error) -> Self {
        let code = match err {
            Error::FitFailed { .. }
            | Error::EmptyState { .. }
            | Error::ZeroWeight
            | Error::Underdispersed { .. }
            | Error::DegenerateVariance { .. }
            | Error::DegenerateDenominator { .. }
            | Error::NonUniqueStationary => EXIT_NUMERIC,
            _ => EXIT_INPUT,
        };
        Self { code, message: format!("{context}: {err}") }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a flag or file context to library errors.
pub trait Context<T> {
    fn ctx(self, context: &str) -> CliResult<T>;
}

impl<T> Context<T> for nphmm::Result<T> {
    fn ctx(self, context: &str) -> CliResult<T> {
        self.map_err(|e| CliError::from_core(context, e))
    }
}
