use std::path::PathBuf;

/// Everything that can go wrong inside the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is singular to working precision")]
    SingularInput,

    #[error("matrix has negative determinant, polar factor would leave SO(n)")]
    NegativeDeterminant,

    #[error("{what} did not converge after {iterations} iterations (last change {last_change:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        last_change: f64,
    },

    #[error("Lyapunov operator is nearly singular (smallest eigenvalue sum {0:e})")]
    NearSingular(f64),

    #[error("rotation coefficient too far from identity (distance {0})")]
    IllConditioned(f64),

    #[error("unknown tableau `{0}` (expected gl1, rk3, gl2 or gl3)")]
    UnknownTableau(String),

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("tableau weight b[{0}] is zero")]
    ZeroWeight(usize),

    #[error("charge distance {0:e} is below the pole threshold")]
    PoleSingularity(f64),

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
