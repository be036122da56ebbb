use thiserror::Error;

/// Errors raised across graph construction, spectral solves, diffusion, and bound checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge ({src}, {dst}) has non-positive weight {weight}")]
    NonPositiveWeight { src: usize, dst: usize, weight: f64 },

    #[error("duplicate edge ({src}, {dst})")]
    DuplicateEdge { src: usize, dst: usize },

    #[error("vertex id {id} out of range for a graph with {n} vertices")]
    IndexOutOfRange { id: usize, n: usize },

    #[error("non-absorbing vertex {vertex} has no outgoing edges")]
    EmptyRow { vertex: usize },

    #[error("graph must have at least one vertex")]
    EmptyGraph,

    #[error("vector of length {got} does not match graph order {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector entry {index} is not finite")]
    NonFinite { index: usize },

    #[error("size {got} is too small, need at least {min}")]
    SizeTooSmall { got: usize, min: usize },

    #[error("epsilon {0} must lie strictly between 0 and 1")]
    BadEpsilon(f64),

    #[error("boundary count {count} must satisfy 0 < count < {n}")]
    BadBoundaryCount { count: usize, n: usize },

    #[error("need more than k = {k} points, got {points}")]
    TooFewPoints { points: usize, k: usize },

    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),

    #[error("random walk is not irreducible on this graph")]
    NotIrreducible,

    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),

    #[error("dominant remaining eigenvalue is part of a complex conjugate pair")]
    ComplexDominantPair,

    #[error("graph has no absorbing set")]
    NoAbsorbingSet,

    #[error("operation requires a graph without absorbing vertices")]
    HasAbsorbingSet,

    #[error("some vertex cannot reach the absorbing set")]
    UnreachableBoundary,

    #[error("target set is empty")]
    EmptyTarget,

    #[error("threshold {0} must lie strictly between 0 and 1")]
    BadThreshold(f64),

    #[error("horizon kmax must be at least 1")]
    BadHorizon,

    #[error("sublevel set is empty for eps = {0}")]
    EmptySublevel(f64),

    #[error("eigenvalue is zero, the bound degenerates")]
    TrivialEigenvalue,

    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    NotAnEquationSolution { residual: f64, tol: f64 },

    #[error("u is negative at vertex {0}")]
    NegativeU(usize),

    #[error("u is nonzero on absorbing vertex {0}")]
    NonzeroOnBoundary(usize),

    #[error("potential sup-norm {0} is not below 1")]
    PotentialTooLarge(f64),

    #[error("unsupported generator family for this operation: {0}")]
    UnsupportedFamily(String),

    #[error("embedding dimension must be between 1 and 3, got {0}")]
    BadDimension(usize),

    #[error("input has zero variance")]
    DegenerateInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status used by the command-line tool: 3 for iterations
    /// that failed to settle, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence(_) | Error::ComplexDominantPair => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
