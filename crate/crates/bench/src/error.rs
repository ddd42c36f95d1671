use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("determinism violation: {0}")]
    DeterminismViolation(String),
    #[error("report needs at least one run")]
    EmptyReport,
    #[error("malformed report: {0}")]
    Report(String),
    #[error(transparent)]
    Cube(#[from] cube_core::CubeError),
}

pub type Result<T> = std::result::Result<T, BenchError>;
