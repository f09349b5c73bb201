use thiserror::Error;

/// Errors produced by the numerical and model-building routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("insufficient depth: {what} needs the cone complete through {required}, but it is complete only below {available}")]
    InsufficientDepth {
        what: String,
        required: f64,
        available: f64,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("precision: {0}")]
    Precision(String),

    #[error("evaluation failed at z = {re} + {im}i: {reason}")]
    Evaluation { re: f64, im: f64, reason: String },

    #[error("root finding did not converge after {iterations} iterations (max residual {max_residual:e})")]
    RootFinding { iterations: usize, max_residual: f64 },

    #[error("cone expansion failed at node {node}: {reason}")]
    Expansion { node: usize, reason: String },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("matrix is reducible; strongly connected components: {components:?}")]
    Reducible { components: Vec<Vec<usize>> },

    #[error("eigen-solver: {0}")]
    Eigen(String),

    #[error("shadowing ambiguous at step {step}: {reason}")]
    Shadowing { step: usize, reason: String },

    #[error("declared Hölder data violated on window [{lo}, {hi}]: observed variation {observed:e} > bound {bound:e}")]
    HolderViolation {
        lo: i64,
        hi: i64,
        observed: f64,
        bound: f64,
    },

    #[error("points lie in different product charts (seam symbols {left} and {right})")]
    OutsideChart { left: u8, right: u8 },

    #[error("inadmissible word {0:?}")]
    Inadmissible(Vec<u8>),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
