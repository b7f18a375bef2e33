use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the numerical routines and the report pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the admissible range {range}")]
    Range {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("no doubling constant sigma <= {max_sigma} found for R = {range_end}")]
    NotDoubling { range_end: f64, max_sigma: f64 },

    #[error("quadrature did not converge on [{a}, {b}] after {subdivisions} subdivisions (error estimate {abs_error:e})")]
    Convergence {
        a: f64,
        b: f64,
        subdivisions: usize,
        abs_error: f64,
    },

    #[error("point is not in the approach region: {0}")]
    NotInCone(String),

    #[error("approach path left the approach region at t = {t}")]
    Path { t: f64 },

    #[error("direction vector is zero")]
    ZeroDirection,

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("rejection sampling acceptance rate {rate:e} is below {min_rate:e}")]
    Sampling { rate: f64, min_rate: f64 },

    #[error("all singular values of the Gram matrix fell below the cutoff")]
    DegenerateDictionary,

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn range(what: &'static str, value: f64, range: impl Into<String>) -> Self {
        Error::Range {
            what,
            value,
            range: range.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
