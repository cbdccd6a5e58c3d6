//! File formats, experiment runner and command-line front end for the
//! `spotmarket-core` simulator.
//!
//! - [`config`]: JSON experiment files, either complete or layered on a preset.
//! - [`output`]: the versioned per-episode CSV and the pooled JSON summary.
//! - [`runner`]: parallel replications with on-disk results.
//! - [`checkpoint`]: versioned JSON snapshots of trained networks.
//! - [`nash`]: payoff-matrix CSV parsing for best-response reports.

pub mod checkpoint;
pub mod config;
pub mod nash;
pub mod output;
pub mod runner;

pub use spotmarket_core as core;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SPOTMARKET_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] spotmarket_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: std::path::PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<std::path::PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
