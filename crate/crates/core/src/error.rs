use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SnnError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical divergence in neuron {neuron} at tick {tick} (v = {v}, w = {w})")]
    Diverged {
        neuron: usize,
        tick: usize,
        v: f64,
        w: f64,
    },
    #[error("population is empty, no front to extract")]
    EmptyPopulation,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl SnnError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        SnnError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        SnnError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
