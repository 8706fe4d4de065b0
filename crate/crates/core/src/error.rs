use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("ragged row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-numeric cell at row {row}, column {col}: {value:?}")]
    NonNumericCell { row: usize, col: usize, value: String },
    #[error("non-finite cell at row {row}, column {col}")]
    NonFiniteCell { row: usize, col: usize },
    #[error("label column {0:?} not found")]
    MissingLabelColumn(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid labeling: {0}")]
    InvalidLabeling(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("neighbor count k={k} out of range for n={n} (need 1 <= k <= n-1)")]
    KOutOfRange { k: usize, n: usize },
    #[error("dataset needs at least 2 points, found {0}")]
    TooFewPoints(usize),
    #[error("graph has no edges")]
    DegenerateGraph,
    #[error("eigen iteration did not converge after {sweeps} sweeps (residual {residual:e})")]
    EigenNoConvergence { sweeps: usize, residual: f64 },
    #[error("need at least 2 non-noise clusters, found {0}")]
    InsufficientClusters(usize),
    #[error("clusters {0} and {1} have coincident centroids")]
    DegenerateCentroids(usize, usize),
    #[error("within-cluster scatter is zero")]
    ZeroWithinScatter,
    #[error("ranking is constant; tau-b undefined")]
    DegenerateRanking,
    #[error("all {0} search trials failed")]
    AllTrialsFailed(usize),
    #[error("prototype set is empty")]
    EmptyPrototypes,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
