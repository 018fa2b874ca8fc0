use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: {1}")]
    InvalidDimension(usize, &'static str),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("matrix has a zero entry at ({row}, {col}) in its first row or column")]
    DephasingDegenerate { row: usize, col: usize },

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    InvalidMatrix(f64),

    #[error("matrix is not bistochastic: {0}")]
    NotBistochastic(String),

    #[error("matrix is not unistochastic (chain-links margin {0:.3e})")]
    NotUnistochastic(f64),

    #[error("point ({u}, {v}) lies outside the cross section")]
    OutOfSection { u: f64, v: f64 },

    #[error("affine chart fails: |z_{chart}| = {modulus:.3e}")]
    ChartFailure { chart: usize, modulus: f64 },

    #[error("not an intersection point (residual {0:.3e})")]
    NotAnIntersection(f64),

    #[error("solver did not stabilize after {rounds} rounds (distinct counts per round: {history:?})")]
    NonConverged { rounds: usize, history: Vec<usize> },

    #[error("tori coincide or intersect in a continuum")]
    Continuum,

    #[error("unknown figure id {0:?}")]
    UnknownFigure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
