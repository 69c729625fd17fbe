use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid Forchheimer polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("root solve for s*g(s) = {xi} did not converge after {iterations} iterations")]
    RootNotConverged { xi: f64, iterations: usize },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("vertex {0} is not on the boundary but a Dirichlet value was given")]
    NotBoundary(usize),

    #[error("conjugate gradients did not reach tolerance after {iterations} iterations (relative residual {residual:e})")]
    LinearSolver { iterations: usize, residual: f64 },

    #[error("nonlinear iteration failed at t = {time}: {iterations} iterations, last increment {increment:e}")]
    NonlinearSolver {
        time: f64,
        iterations: usize,
        increment: f64,
    },

    #[error("refinement levels must double: {0}")]
    NonDoubling(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("problem validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
