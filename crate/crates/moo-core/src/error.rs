use thiserror::Error;

/// Domain errors raised by the individual building blocks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MooError {
    #[error("objective vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid gene spec `{name}`: lower {lower} must be finite and below upper {upper}")]
    InvalidGene { name: String, lower: f64, upper: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Failure of a full optimization run.
#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Config(#[from] MooError),
    #[error("evaluation failed at generation {generation}, individual {index}: {source}")]
    Evaluation {
        generation: usize,
        index: usize,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error(
        "evaluation at generation {generation}, individual {index} returned {got} objectives, expected {expected}"
    )]
    ObjectiveCount {
        generation: usize,
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("evaluation at generation {generation}, individual {index} returned a non-finite objective")]
    NonFinite { generation: usize, index: usize },
}
