use thiserror::Error;

use crate::sim::Side;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter space: {0}")]
    InvalidSpace(String),

    #[error("configuration is not a member of the parameter space: {0}")]
    NotInSpace(String),

    #[error("invalid platform model: {0}")]
    InvalidModel(String),

    #[error("unknown affinity label `{label}` for {side} side")]
    UnknownAffinity { side: Side, label: String },

    #[error("host fraction {0} is outside [0, 100]")]
    FractionOutOfRange(u32),

    #[error("noise is enabled (rel. stddev {0}); exhaustive optimum is ill-defined")]
    NoisyModel(f64),

    #[error("invalid annealing schedule: {0}")]
    InvalidSchedule(String),

    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("evaluation failed for configuration {config}: {source}")]
    Evaluation {
        config: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),

    #[error("need at least {needed} samples, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },

    #[error("unknown label `{0}` (not seen during training)")]
    UnknownLabel(String),

    #[error("unsupported model version {found}; supported versions: {supported:?}")]
    UnsupportedVersion { found: u32, supported: &'static [u32] },

    #[error("invalid model document: {0}")]
    Document(String),

    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid training sample at row {row}: {reason}")]
    InvalidSample { row: usize, reason: String },

    #[error("comparison needs an EM result")]
    MissingEnumeration,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
