// SPDX-License-Identifier: Apache-2.0

//! Error type shared by every module in this crate.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A binary file does not match the expected on-disk layout.
    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    /// A configuration file or parameter set fails validation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A plane fit was requested on a point set that cannot support one
    /// (fewer than three points, or covariance rank below two).
    #[error("degenerate plane fit: {0}")]
    DegenerateFit(String),

    /// An operation was called with arguments that violate its contract.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
