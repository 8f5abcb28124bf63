use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The null space of the generator is not one-dimensional within tolerance.
    #[error("steady state is not unique (singular-value gap ratio {ratio:.3e} below {threshold:.1e})")]
    DegenerateNess { ratio: f64, threshold: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("time propagation failed: {0}")]
    StepFailure(String),

    #[error("eigenstate tracking ambiguous near parameter {parameter}: best overlap {overlap:.3}")]
    TrackingAmbiguity { parameter: f64, overlap: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigensolver(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
