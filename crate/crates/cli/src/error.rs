use thiserror::Error;

/// Failures of a command, each mapped to a fixed process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// A check of the property suites failed.
    #[error("property check failed: {0}")]
    Property(String),

    /// Unreadable input, malformed JSON, unknown fields or suite names.
    #[error("parse error: {0}")]
    Parse(String),

    /// Well-formed input describing an invalid scenario.
    #[error("invalid scenario: {0}")]
    Validation(String),

    /// Closed form and integrator disagree beyond tolerance.
    #[error("numerical contract violated: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Property(_) => 1,
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub(crate) fn invalid(e: impl std::fmt::Display) -> Self {
        CliError::Validation(e.to_string())
    }
}
