use thiserror::Error;

/// Failures of a subcommand, each with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// A check came back negative: KAT mismatch, invalid signature,
    /// failed simulation.
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<pqproc_core::Error> for CliError {
    fn from(e: pqproc_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<pqproc_isa::IsaError> for CliError {
    fn from(e: pqproc_isa::IsaError) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<pqproc_analysis::AnalysisError> for CliError {
    fn from(e: pqproc_analysis::AnalysisError) -> Self {
        CliError::Usage(e.to_string())
    }
}
