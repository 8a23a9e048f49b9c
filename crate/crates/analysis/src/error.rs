use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least {min} Monte Carlo trials, got {got}")]
    TooFewTrials { got: usize, min: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
