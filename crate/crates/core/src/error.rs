use thiserror::Error;

/// Errors raised across the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("constraint set is empty")]
    EmptySet,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} did not converge within {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("point is not a member of the set (residual {0:e})")]
    NotAMember(f64),

    #[error("unsupported constraint: {0}")]
    UnsupportedConstraint(String),

    #[error("invalid marginal: {0}")]
    InvalidMarginal(String),

    #[error("numerical underflow: {0}")]
    NumericalUnderflow(String),

    #[error("ill-conditioned pencil: {0}")]
    IllConditionedPencil(String),

    #[error("missing reference: {0}")]
    MissingReference(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    /// Wraps the error with a description of the failing step.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// The innermost error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
