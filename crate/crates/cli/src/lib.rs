//! Library side of the `qwalk` command: configuration, orchestration and
//! output emitters, kept out of `main` so they can be tested in-process.

pub mod args;
pub mod config;
pub mod output;
pub mod run;

use std::fmt::Display;

use qwalk_core::WalkError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] WalkError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Display, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for engine failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Engine(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}
