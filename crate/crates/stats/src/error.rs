use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("statistic undefined: {0}")]
    UndefinedStatistic(String),
    #[error("unknown feature '{0}'")]
    UnknownFeature(String),
}

pub type Result<T> = std::result::Result<T, StatsError>;
