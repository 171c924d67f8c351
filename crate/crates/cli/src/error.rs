use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Exit status for each failure class.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// One schema violation. `line` is 1-based and absent for missing keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

fn list(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("  {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read config {path}: {source}")]
    ConfigRead {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid configuration ({} problem(s)):\n{}", .0.len(), list(.0))]
    Config(Vec<Violation>),

    #[error("{scenario}: {source}")]
    Core {
        scenario: String,
        source: helix_core::Error,
    },

    #[error("{scenario}: {source}")]
    Fdtd {
        scenario: String,
        source: helix_fdtd::Error,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },

    #[error("{0}: no data rows")]
    EmptyInput(PathBuf),

    #[error("{path}: {message}")]
    BadInput { path: PathBuf, message: String },

    #[error("cannot set up the thread pool: {0}")]
    Threads(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        use helix_core::Error as C;
        use helix_fdtd::Error as F;
        match self {
            Error::ConfigRead { .. } | Error::Config(_) | Error::Threads(_) => EXIT_CONFIG,
            Error::Core { source, .. }
            | Error::Fdtd {
                source: F::Core(source),
                ..
            } => match source {
                C::Io(_) | C::Csv(_) | C::Json(_) => EXIT_IO,
                _ => EXIT_NUMERIC,
            },
            Error::Fdtd { source, .. } => match source {
                F::Io(_) | F::Csv(_) | F::Json(_) => EXIT_IO,
                _ => EXIT_NUMERIC,
            },
            Error::Io { .. } | Error::EmptyInput(_) | Error::BadInput { .. } => EXIT_IO,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attaches a scenario name to module errors.
pub trait Context<T> {
    fn within(self, scenario: &str) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, helix_core::Error> {
    fn within(self, scenario: &str) -> Result<T> {
        self.map_err(|source| Error::Core {
            scenario: scenario.into(),
            source,
        })
    }
}

impl<T> Context<T> for std::result::Result<T, helix_fdtd::Error> {
    fn within(self, scenario: &str) -> Result<T> {
        self.map_err(|source| Error::Fdtd {
            scenario: scenario.into(),
            source,
        })
    }
}
