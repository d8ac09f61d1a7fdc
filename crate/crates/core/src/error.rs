use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rest distance {rest_in} in is short of the hole at {hole_in} in")]
    BallShortOfHole { hole_in: f64, rest_in: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("putt at the origin has no direction")]
    UndefinedAngle,

    #[error("only {survivors} putts survive filtering at {hole_in} in (need at least 2)")]
    InsufficientData { hole_in: f64, survivors: usize },

    #[error("degenerate dispersion at {hole_in} in: fitted sd is zero")]
    DegenerateDispersion { hole_in: f64 },

    #[error("aim {aim_in} in exceeds the largest admissible aim {limit_in} in")]
    AimOutOfRange { aim_in: f64, limit_in: f64 },

    #[error("transition models use different discretizations")]
    MismatchedDiscretization,

    #[error("chain is not absorbing: state {state} cannot reach the target")]
    NotAbsorbing { state: usize },

    #[error("transition model for {player} is improper: {reason}")]
    Improper { player: String, reason: String },

    #[error("linear system is singular")]
    Singular,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("{count} strategy profiles exceed the enumeration limit {limit}")]
    TooManyProfiles { count: f64, limit: u64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
