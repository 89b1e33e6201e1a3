use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("numerically singular matrix: {0}")]
    Singular(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("assignment problem has no feasible solution")]
    Infeasible,

    #[error("problem of {tracks} tracks x {measurements} measurements exceeds enumeration bound {bound}")]
    SizeLimit {
        tracks: usize,
        measurements: usize,
        bound: usize,
    },

    #[error("{path}: parse error at `{json_path}`: {message}")]
    Parse {
        path: PathBuf,
        json_path: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Validation { path: PathBuf, message: String },

    #[error("unknown class `{name}` (known classes: {known})")]
    UnknownClass { name: String, known: String },

    #[error("scene `{scene}`, frame {frame}, class {class}: {source}")]
    Context {
        scene: String,
        frame: u64,
        class: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Metrics(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDensity(_) => "invalid_density",
            Error::Singular(_) => "singular",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Infeasible => "infeasible",
            Error::SizeLimit { .. } => "size_limit",
            Error::Parse { .. } => "parse",
            Error::Validation { .. } => "validation",
            Error::UnknownClass { .. } => "unknown_class",
            Error::Context { source, .. } => source.kind(),
            Error::Io { .. } => "io",
            Error::Metrics(_) => "metrics",
        }
    }
}
