use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("singular matrix: pivot {pivot:e} at index {index} is below threshold {threshold:e}")]
    Singular {
        index: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("dense solve refused: dimension {d} exceeds guard {limit}")]
    SizeGuard { d: usize, limit: usize },

    #[error("numerical inconsistency: {0}")]
    Inconsistent(String),

    #[error("unstable normal mode: frequency-squared eigenvalue {eigenvalue:e} is negative")]
    Instability { eigenvalue: f64 },

    #[error("rescaled width undefined for gamma = 0")]
    UndefinedRescaling,

    #[error("fit window [{lo}, {hi}] contains {count} points, need at least 2")]
    FitWindow { lo: f64, hi: f64, count: usize },

    #[error("density grid has no sample points")]
    EmptyGrid,

    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    AtPoint {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors produced by the linear algebra or the dynamics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::AtPoint { source, .. } => source.is_numerical(),
            Error::Singular { .. } | Error::Inconsistent(_) | Error::Instability { .. } => true,
            _ => false,
        }
    }

    pub fn at(self, context: impl Into<String>) -> Error {
        Error::AtPoint {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::ParameterDomain(msg.into())
}
