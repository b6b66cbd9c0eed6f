//! Standard-library side of the watermarking lab: key and latent files,
//! CSV reports, run configuration and the `ssb` command-line tool.

pub mod cli;
pub mod config;
pub mod keyfile;
pub mod latent;
pub mod parse;
pub mod reports;

use std::fmt;
use std::path::Path;

/// Exit code for bad input, bad files and domain errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for numerical non-convergence.
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug)]
pub enum LabError {
    Core(ssb_core::Error),
    Io { path: String, message: String },
    Format(String),
    Usage(String),
}

impl LabError {
    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        LabError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn format(msg: impl Into<String>) -> Self {
        LabError::Format(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        LabError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(e) if e.is_convergence() => EXIT_CONVERGENCE,
            _ => EXIT_USAGE,
        }
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Core(e) => write!(f, "{e}"),
            LabError::Io { path, message } => write!(f, "{path}: {message}"),
            LabError::Format(m) => write!(f, "bad file: {m}"),
            LabError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<ssb_core::Error> for LabError {
    fn from(e: ssb_core::Error) -> Self {
        LabError::Core(e)
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            LabError::Io {
                path: "<output>".into(),
                message: e.to_string(),
            }
        } else {
            LabError::Format(e.to_string())
        }
    }
}
