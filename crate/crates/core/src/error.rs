use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("decision vector rejected at slot {slot}: {reason}")]
    InvalidVector { slot: usize, reason: String },

    #[error("decision vector has length {got}, expected {expected}")]
    VectorLength { expected: usize, got: usize },

    #[error("no feasible completion exists for this decision vector")]
    Infeasible,

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown objective '{0}'")]
    UnknownObjective(String),

    #[error("unknown algorithm '{0}'")]
    UnknownAlgorithm(String),

    #[error("search space has {size} points, brute force is limited to {limit}")]
    SpaceTooLarge { size: u128, limit: u128 },

    #[error("replay buffer is empty")]
    EmptyBuffer,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("objective rejected vector {vector:?}: {reason}")]
    ObjectiveRejected { vector: Vec<i64>, reason: String },

    #[error("score matrix: {0}")]
    Stats(String),

    #[error("not enough samples: {samples} < {bins} bins")]
    TooFewSamples { samples: usize, bins: usize },

    #[error("missing runs: {}", format_missing(.0))]
    MissingRuns(Vec<(String, u64)>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("toml parse error: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("toml write error: {0}")]
    TomlSer(#[from] toml::ser::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn format_missing(missing: &[(String, u64)]) -> String {
    missing
        .iter()
        .map(|(a, s)| format!("{a}/seed {s}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
