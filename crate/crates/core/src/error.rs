use thiserror::Error;

/// Errors raised by graph construction, exact oracles, samplers and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("size budget exceeded: {what} needs {needed}, budget is {budget}")]
    Size {
        what: &'static str,
        needed: usize,
        budget: usize,
    },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("invalid structure: {0}")]
    Structure(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("source set {0:?} is not realizable on this graph")]
    Unrealizable(Vec<usize>),

    #[error("backbone invariant violated at vertex {vertex}: {reason}")]
    Invariant { vertex: usize, reason: String },

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
