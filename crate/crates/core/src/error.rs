use thiserror::Error;

/// Errors raised by mesh construction, linear solves and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid time mesh: {0}")]
    Mesh(String),
    #[error("singular linear system")]
    Singular,
    #[error("field does not vanish on the boundary (|u| = {0:e})")]
    Boundary(f64),
    #[error("grid mismatch: expected {expected} nodes, found {found}")]
    GridMismatch { expected: usize, found: usize },
    #[error("missing data: {0}")]
    MissingData(&'static str),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("trajectory mismatch: {0}")]
    Trajectory(String),
}

pub type Result<T> = std::result::Result<T, Error>;
