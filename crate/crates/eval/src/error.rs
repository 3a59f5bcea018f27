use bvpain_core::CoreError;
use bvpain_learn::LearnError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("class {0} has no true samples")]
    UndefinedClass(String),
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
    #[error("task cannot be stratified: {0}")]
    Unstratifiable(String),
    #[error("{failed} of {folds} folds failed: {first_error}")]
    RunFailed {
        failed: usize,
        folds: usize,
        first_error: String,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, EvalError>;
