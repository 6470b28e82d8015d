use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of a model function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration error: {0}")]
    Integration(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A record violates one of its construction invariants.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("cost error: {0}")]
    Cost(String),

    #[error("solver error: {0}")]
    Solver(String),

    /// A closed-loop run stopped before its horizon was exhausted.
    #[error("closed loop aborted at step {step}: {source}")]
    ClosedLoop {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    /// A metric is mathematically undefined for the given run.
    #[error("metric undefined: {0}")]
    Metric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse failure classes, used by the command-line harness to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Solver,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) | Error::Csv(_) => ErrorClass::Io,
            Error::Integration(_)
            | Error::Cost(_)
            | Error::Solver(_)
            | Error::ClosedLoop { .. }
            | Error::Metric(_) => ErrorClass::Solver,
            Error::Domain(_)
            | Error::Argument(_)
            | Error::Validation(_)
            | Error::Parse { .. }
            | Error::Config(_)
            | Error::Json(_) => ErrorClass::Config,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
