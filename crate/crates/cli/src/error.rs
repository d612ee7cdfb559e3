use std::io;
use std::path::{Path, PathBuf};

use boussinesq_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: CoreError,
    },

    #[error("assumption check failed: {0}")]
    Assumption(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: malformed artifact: {reason}", path.display())]
    Artifact { path: PathBuf, reason: String },
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn stage(stage: &'static str) -> impl FnOnce(CoreError) -> Self {
        move |source| CliError::Stage { stage, source }
    }

    /// 0 success, 1 I/O, 2 validation, 3 numerical stability, 4 assumption
    /// failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stage { source, .. } => core_exit_code(source),
            CliError::Assumption(_) => 4,
            CliError::Io { .. } | CliError::Artifact { .. } => 1,
        }
    }
}

fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Node { source, .. } => core_exit_code(source),
        // a vanishing s₁₁ means a soliton, i.e. the solitonless assumption fails
        CoreError::NearZeroDenominator { .. } => 4,
        CoreError::Singular(_) => 3,
        e if e.is_numerical() => 3,
        _ => 2,
    }
}
