//! Command implementations behind the `nbs` binary.

pub mod args;
pub mod commands;
pub mod mapgen;
pub mod output;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("map error: {0}")]
    Map(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Map(_) => 3,
            CliError::Io(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<nbs_core::MapError> for CliError {
    fn from(e: nbs_core::MapError) -> Self {
        CliError::Map(e.to_string())
    }
}

impl From<nbs_core::EngineError> for CliError {
    fn from(e: nbs_core::EngineError) -> Self {
        use nbs_core::EngineError::*;
        match e {
            Map(m) => CliError::Map(m.to_string()),
            Mcdm(_) | Sensing(_) | Config(_) => CliError::Config(e.to_string()),
            NoCandidates | Internal(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<nbs_core::McdmError> for CliError {
    fn from(e: nbs_core::McdmError) -> Self {
        CliError::Config(e.to_string())
    }
}
