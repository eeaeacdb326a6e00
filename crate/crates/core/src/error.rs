use thiserror::Error;

use crate::tower::AlgebraElement;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("level mismatch: expected level {expected}, found level {found}")]
    LevelMismatch { expected: usize, found: usize },

    #[error("cannot move from level {from} down to level {to}")]
    LevelOrder { from: usize, to: usize },

    #[error("matrix of shape {rows}x{cols} does not match level {level} (expected {expected}x{expected})")]
    Shape {
        rows: usize,
        cols: usize,
        level: usize,
        expected: usize,
    },

    #[error("level {0} is too large to represent")]
    LevelTooLarge(usize),

    #[error("input is not Hermitian (max |a - a*| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error(
        "operator is not self-adjoint for the trace inner product: \
         |<S e_{row}, e_{col}> - <e_{row}, S e_{col}>| = {deviation:e}"
    )]
    NotSelfAdjoint {
        deviation: f64,
        row: usize,
        col: usize,
    },

    #[error("generator is not positive: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("semigroup time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error(
        "dense representation at level {level} needs {bytes} bytes, \
         above the cap of level {cap}"
    )]
    BudgetExceeded { level: usize, cap: usize, bytes: u128 },

    #[error(
        "family is incompatible between levels {level} and {}: \
         form values {lower:e} vs {upper:e}", level + 1
    )]
    IncompatibleFamily {
        level: usize,
        witness: Box<AlgebraElement>,
        lower: f64,
        upper: f64,
    },

    #[error("bimodule vectors do not match: {0}")]
    BimoduleMismatch(String),

    #[error("unknown suite {name:?}; valid suites are: {valid}")]
    UnknownSuite { name: String, valid: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
