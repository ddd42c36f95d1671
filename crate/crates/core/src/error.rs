use thiserror::Error;

use crate::facts::ValidationReport;

pub type Result<T, E = CubeError> = std::result::Result<T, E>;

/// Every failure the engine can report. Each variant maps onto a stable
/// machine-readable code (see [`CubeError::code`]) used by error documents.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CubeError {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("fact table is missing column '{0}'")]
    SchemaMismatch(String),

    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("fact table has no data rows")]
    EmptyTable,

    #[error("fact table failed validation ({} orphan reference(s), {} granularity violation(s))",
        .0.orphan_references.len(), .0.granularity_violations.len())]
    Validation(Box<ValidationReport>),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("coordinate error: {0}")]
    Coordinate(String),

    #[error("level order error: {0}")]
    LevelOrder(String),

    #[error("cannot drill down: {0}")]
    UnsupportedDrill(String),

    #[error("filter error: {0}")]
    Filter(String),

    #[error("axis error: {0}")]
    Axis(String),

    #[error("integer overflow in measure '{measure}' at ({})", .coordinate.join(", "))]
    Overflow {
        measure: String,
        coordinate: Vec<String>,
    },

    #[error("aggregation contract violated: {0}")]
    Contract(String),

    #[error("malformed query: {0}")]
    Query(String),
}

impl CubeError {
    pub fn code(&self) -> &'static str {
        match self {
            CubeError::Schema(_) => "schema",
            CubeError::SchemaMismatch(_) => "schema_mismatch",
            CubeError::Parse { .. } => "parse",
            CubeError::EmptyTable => "empty_table",
            CubeError::Validation(_) => "validation",
            CubeError::Precondition(_) => "precondition",
            CubeError::Coordinate(_) => "coordinate",
            CubeError::LevelOrder(_) => "level_order",
            CubeError::UnsupportedDrill(_) => "unsupported_drill",
            CubeError::Filter(_) => "filter",
            CubeError::Axis(_) => "axis",
            CubeError::Overflow { .. } => "overflow",
            CubeError::Contract(_) => "contract",
            CubeError::Query(_) => "query",
        }
    }
}
