// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

use std::io;
use std::path::Path;

use span2records_core::analysis::ReconstructError;
use span2records_core::kieker::LogError;
use span2records_core::otlp::IngestError;
use span2records_core::synth::GeneratorError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub const USAGE: u8 = 1;
    pub const DATA: u8 = 2;
    pub const IO: u8 = 3;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => Self::USAGE,
            CliError::Data(_) => Self::DATA,
            CliError::Io(_) => Self::IO,
        }
    }

    pub fn io(path: &Path, err: io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<IngestError> for CliError {
    fn from(err: IngestError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<LogError> for CliError {
    fn from(err: LogError) -> Self {
        match err {
            LogError::Io { .. } => CliError::Io(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

impl From<ReconstructError> for CliError {
    fn from(err: ReconstructError) -> Self {
        match err {
            ReconstructError::InvalidSynchronousTrace { .. } => CliError::Data(format!(
                "{err}\nthe trace contains overlapping executions; \
                 rerun with --asynchronousTrace to infer callers from timestamps"
            )),
            ReconstructError::InvalidTrace { .. } => CliError::Data(err.to_string()),
        }
    }
}

impl From<GeneratorError> for CliError {
    fn from(err: GeneratorError) -> Self {
        CliError::Usage(err.to_string())
    }
}
