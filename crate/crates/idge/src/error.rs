use std::path::{Path, PathBuf};

use idge_core::engine::EngineError;
use idge_core::script::ScriptError;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

impl IoError {
    pub fn new(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn line(path: &Path, line: usize, source: serde_json::Error) -> Self {
        IoError::Json {
            path: path.to_path_buf(),
            line,
            source,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("script {id}: {source}")]
    Script {
        id: String,
        #[source]
        source: ScriptError,
    },
    #[error("{variant} seed {seed}: {source}")]
    Engine {
        variant: String,
        seed: u64,
        #[source]
        source: EngineError,
    },
    #[error("no round of category {0:?} within the draw budget")]
    QuotaUnreachable(String),
    #[error("invalid balance spec: {0}")]
    BalanceSpec(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] idge_core::coreset::CoreError),
}
