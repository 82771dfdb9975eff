//! Error type shared across the solver crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("singular circulant operator: eigenvalue {index} has modulus {modulus:.3e}")]
    SingularCirculant { index: usize, modulus: f64 },

    #[error("singular matrix: zero pivot in column {column}")]
    SingularMatrix { column: usize },

    #[error("Gohberg-Semencul formula inapplicable: |x[0]| = {xi0:.3e} below threshold")]
    GsfInapplicable { xi0: f64 },

    #[error("CGS breakdown at iteration {iteration}: inner product {value:.3e}")]
    Breakdown { iteration: usize, value: f64 },

    #[error("CGS divergence at iteration {iteration}: non-finite iterate")]
    Divergence { iteration: usize },

    #[error(
        "iterative solve unconverged: relative residual {relative_residual:.3e} after {iterations} iterations"
    )]
    Unconverged {
        relative_residual: f64,
        iterations: usize,
    },

    #[error("invalid problem specification: {0}")]
    ProblemSpec(String),

    #[error("solver failed at time level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<SolverError>,
    },

    #[error("missing exact solution in problem specification")]
    MissingExact,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SolverError>;
