use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("training diverged: {0}")]
    TrainingDiverged(String),
    #[error("grid search failed: every grid point failed to train")]
    SearchFailed,
    #[error("model serialization: {0}")]
    Serialization(String),
}

pub type Result<T, E = LearnError> = std::result::Result<T, E>;
