//! Exit codes: 0 success, 1 usage or configuration error, 2 data
//! validation error, 3 runtime failure.

use std::fmt;

use bvpain_core::CoreError;
use bvpain_eval::EvalError;
use bvpain_learn::LearnError;
use bvpain_stats::StatsError;

pub const USAGE: u8 = 1;
pub const DATA: u8 = 2;
pub const RUNTIME: u8 = 3;

/// Errors raised by the commands themselves.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for Failure {}

fn core_code(e: &CoreError) -> u8 {
    match e {
        CoreError::InvalidConfiguration(_) | CoreError::InvalidParameter(_) => USAGE,
        CoreError::Io { .. } => RUNTIME,
        _ => DATA,
    }
}

fn learn_code(e: &LearnError) -> u8 {
    match e {
        LearnError::InvalidHyperparameter(_) => USAGE,
        _ => RUNTIME,
    }
}

/// The exit code of the first classified error in the chain.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return match f {
                Failure::Usage(_) => USAGE,
                Failure::Data(_) => DATA,
            };
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return core_code(e);
        }
        if let Some(e) = cause.downcast_ref::<EvalError>() {
            return match e {
                EvalError::InvalidInput(_) => USAGE,
                EvalError::Unstratifiable(_) | EvalError::UndefinedClass(_) => DATA,
                EvalError::Core(c) => core_code(c),
                EvalError::Learn(l) => learn_code(l),
                _ => RUNTIME,
            };
        }
        if let Some(e) = cause.downcast_ref::<StatsError>() {
            return match e {
                StatsError::UnknownFeature(_) => USAGE,
                _ => DATA,
            };
        }
        if let Some(e) = cause.downcast_ref::<LearnError>() {
            return learn_code(e);
        }
    }
    RUNTIME
}
