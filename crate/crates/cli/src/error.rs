use std::io;
use std::path::Path;

use scdd_core::indicators::IndicatorError;
use scdd_core::ingest::IngestError;
use scdd_core::netgen::NetgenError;
use scdd_core::sampler::SamplerError;
use thiserror::Error;

/// Command failure, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or missing input data or configuration (exit 2).
    #[error("{0}")]
    Input(String),
    /// Artifacts that fail validation or do not belong together (exit 3).
    #[error("integrity error: {0}")]
    Integrity(String),
    /// Anything else (exit 1).
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Input(_) => 2,
            CliError::Integrity(_) => 3,
        }
    }

    /// I/O failure on `path`; a missing input file is an input error.
    pub fn io(path: &Path, e: io::Error) -> Self {
        let msg = format!("{}: {e}", path.display());
        match e.kind() {
            io::ErrorKind::NotFound | io::ErrorKind::PermissionDenied => CliError::Input(msg),
            _ => CliError::Internal(msg),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<NetgenError> for CliError {
    fn from(e: NetgenError) -> Self {
        match e {
            NetgenError::Format(_) | NetgenError::SizeMismatch { .. } => CliError::Integrity(e.to_string()),
            NetgenError::Config(_) | NetgenError::NoWiringPairs | NetgenError::EmptyImports => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<IndicatorError> for CliError {
    fn from(e: IndicatorError) -> Self {
        match e {
            IndicatorError::UnassignedOrigin(_) | IndicatorError::SizeMismatch { .. } => {
                CliError::Integrity(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}
