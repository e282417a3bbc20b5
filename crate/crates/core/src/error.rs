use std::fmt;
use std::path::PathBuf;

/// Which primary field left the admissible region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Volume,
    Velocity,
    Temperature,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Volume => "v",
            Field::Velocity => "u",
            Field::Temperature => "theta",
        })
    }
}

/// Loss of positivity (or finiteness) of the state during a run.
///
/// This is the discrete counterpart of leaving the bound window of the
/// global existence theorem, so it is reported rather than repaired.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeExit {
    pub field: Field,
    pub index: usize,
    pub time: f64,
    pub value: f64,
    pub floor: f64,
}

impl fmt::Display for RegimeExit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "regime exit at t = {}: {}[{}] = {} (floor {})",
            self.time, self.field, self.index, self.value, self.floor
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {what} = {value} (requires {requirement})")]
    Domain {
        what: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("overflow evaluating {0}")]
    Overflow(&'static str),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{0}")]
    RegimeExit(RegimeExit),

    #[error("non-finite value in {field}[{index}] at t = {time}")]
    NonFinite { field: Field, index: usize, time: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} (estimate {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, requirement: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            requirement,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the failure is a positivity loss of the simulated state.
    pub fn is_regime_exit(&self) -> bool {
        matches!(self, Error::RegimeExit(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
