use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what}: radicand {radicand:e} is negative (argument {argument:e})")]
    Domain {
        what: &'static str,
        radicand: f64,
        argument: f64,
    },

    #[error("query radius {r:e} m lies outside [0, {limit:e}] m ({what})")]
    OutOfRange { what: &'static str, r: f64, limit: f64 },

    #[error(
        "quadrature did not converge on [{lower:e}, {upper:e}]: \
         estimated error {achieved:e} exceeds requested {requested:e}"
    )]
    Quadrature {
        lower: f64,
        upper: f64,
        achieved: f64,
        requested: f64,
    },

    #[error("non-finite entry in row {row} of the {term} term")]
    NonFinite { row: usize, term: &'static str },

    #[error("linear system is singular or ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("opening {opening:e} m at the fluid front r = {radius:e} m is below the floor {floor:e} m")]
    OpeningFloor {
        radius: f64,
        opening: f64,
        floor: f64,
    },

    #[error("{loop_name} loop did not converge within {iterations} iterations (last relative change {change:e})")]
    Divergence {
        loop_name: &'static str,
        iterations: usize,
        change: f64,
    },

    #[error("config error{}: {message}", location.as_ref().map(|l| format!(" at {l}")).unwrap_or_default())]
    Config {
        message: String,
        location: Option<String>,
    },

    #[error("unit error in `{input}`: {message}")]
    Unit { input: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(message: impl Into<String>, location: Option<String>) -> Self {
        Error::Config {
            message: message.into(),
            location,
        }
    }

    /// Stable machine-readable category, also used to pick the CLI exit code.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config { .. } | Error::Unit { .. } | Error::InvalidParameter { .. } => {
                ErrorKind::Config
            }
            Error::Io { .. } | Error::Csv { .. } => ErrorKind::Io,
            _ => ErrorKind::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numerical,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Io => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Numerical => "numerical",
            ErrorKind::Io => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
