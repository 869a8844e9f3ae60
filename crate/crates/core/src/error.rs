use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error in {origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("riccati iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    RiccatiNonConvergence { iterations: usize, residual: f64 },
    #[error("gain synthesis failed for submodel {index}: {source}")]
    Synthesis {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("no eigenfrequency found in [{lo}, {hi}] rad/s")]
    NoEigenfrequency { lo: f64, hi: f64 },
    #[error("non-finite state at t = {t} s: {what}")]
    NonFinite { t: f64, what: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(origin: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            origin: origin.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Numerical(_)
            | Error::RiccatiNonConvergence { .. }
            | Error::NoEigenfrequency { .. }
            | Error::NonFinite { .. } => true,
            Error::Synthesis { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
