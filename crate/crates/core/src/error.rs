use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("matrix is not symmetric at ({i}, {j}): {a} vs {b}")]
    Asymmetry { i: usize, j: usize, a: f64, b: f64 },

    #[error("negative weight {value} at ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, value: f64 },

    #[error("nonzero diagonal {value} at node {i}")]
    Diagonal { i: usize, value: f64 },

    #[error("incidence entry {value} at ({row}, {col}) is not 0 or 1")]
    NonBinary { row: usize, col: usize, value: f64 },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{0}")]
    Semantics(String),

    #[error("missing covariate network `{0}`")]
    MissingCovariate(String),

    #[error("missing attribute `{0}`")]
    MissingAttribute(String),

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("target network has zero Frobenius norm")]
    ZeroTarget,

    #[error("separation: {0}")]
    Separation(String),

    #[error("rank deficient design: rank {rank} < {columns} columns")]
    RankDeficiency { rank: usize, columns: usize },

    #[error("permutation refit failed after {retries} retries for predictor `{predictor}`")]
    PermutationFailure { predictor: String, retries: usize },

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("no convergence after {0} iterations")]
    NonConvergence(usize),

    #[error("unsupported change type: {0}")]
    UnsupportedChange(String),

    #[error("infeasible: {0}")]
    Feasibility(String),

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("baseline mean is degenerate at step {step}")]
    DegenerateBaseline { step: usize },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input or configuration rather than a
    /// failure while computing.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::Parse(_)
                | Error::Asymmetry { .. }
                | Error::NegativeWeight { .. }
                | Error::Diagonal { .. }
                | Error::NonBinary { .. }
                | Error::InvalidNetwork(_)
                | Error::InvalidBudget(_)
                | Error::Io { .. }
        )
    }
}
