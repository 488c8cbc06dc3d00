use thiserror::Error;

pub type Result<T> = std::result::Result<T, NsvError>;

#[derive(Debug, Error)]
pub enum NsvError {
    #[error("grid of {grid} points per dimension is too small, need at least {required}")]
    GridTooSmall { grid: usize, required: usize },

    /// Picard iteration did not reach the requested residual. `step` is the
    /// time level when the failure happened inside a trajectory run.
    #[error("nonlinear solve failed at step {step:?} after {iterations} iterations (residual {residual:e}); increase the number of time steps")]
    NonlinearSolveFailed {
        step: Option<usize>,
        iterations: usize,
        residual: f64,
    },

    #[error("L^{exponent} quadrature unresolved: doubling the grid changed the value by {relative_change:e} (limit {limit:e})")]
    QuadratureUnresolved {
        exponent: f64,
        relative_change: f64,
        limit: f64,
    },

    #[error("test function is negative somewhere on the verification grid (min {min:e})")]
    PhiNotNonnegative { min: f64 },

    #[error("schedule violation: {0}")]
    ScheduleViolation(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("sweep level n={n}: {source}")]
    Level {
        n: u32,
        #[source]
        source: Box<NsvError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
