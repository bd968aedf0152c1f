use thiserror::Error;

/// Errors raised by the geometry, kernel, system, oracle and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("inclusion cloud is empty")]
    EmptyCloud,

    #[error("could not place {placed} of {requested} inclusions after {attempts} attempts")]
    PackingFailed {
        placed: usize,
        requested: usize,
        attempts: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coincident evaluation points")]
    SingularPoint,

    #[error("point lies outside the ambient domain")]
    OutOfDomain,

    /// `index` is `None` when raised by a single-inclusion kernel.
    #[error("point lies inside inclusion {index:?}")]
    InsideInclusion { index: Option<usize> },

    #[error("unsupported inclusion shape {0:?}")]
    UnsupportedShape(crate::geometry::ShapeKind),

    #[error("interaction system is numerically singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("collocation system lost rank: {rank} of {columns} columns retained")]
    IllConditioned { rank: usize, columns: usize },

    #[error("block iteration did not converge after {iterations} sweeps (last relative change {change:e})")]
    NotConverged { iterations: usize, change: f64 },
    #[error("operation requires the free-space ambient domain")]
    WrongAmbient,

    #[error("finite-difference step {step:e} exceeds limit {limit:e}")]
    StepTooLarge { step: f64, limit: f64 },

    #[error("every study row failed the oracle trust threshold: {0}")]
    OracleUntrusted(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
