use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid rational literal {0:?}")]
    InvalidRational(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("section has no terms")]
    EmptySection,

    #[error("vertex {vertex} is not a smooth fixed point: {reason}")]
    NonSmoothVertex { vertex: String, reason: String },

    #[error("lattice point cap exceeded at level {level}: more than {cap} points")]
    CapExceeded { level: u32, cap: usize },

    #[error("duplicate evaluation point {0}")]
    DuplicatePoint(String),

    #[error("divisor family is empty, so L - tD stays big for every t")]
    UnboundedFamily,

    #[error("the origin does not lie in the body")]
    OriginNotContained,

    #[error("inverted simplex size must be nonnegative, got {0}")]
    NegativeSize(String),

    #[error("no bodies supplied for point {0}")]
    MissingBodies(String),

    #[error("m(D) = {0} was supplied without ampleness evidence")]
    MissingEvidence(i64),

    #[error("expected at least {expected} points, got {found}")]
    TooFewPoints { expected: usize, found: usize },

    #[error("expected {expected} hypothesis checks, got {found}")]
    WrongArity { expected: usize, found: usize },

    #[error("ell must be at least 2, got {0}")]
    InvalidEll(i64),

    #[error("inconsistent Seshadri bounds: upper {upper} < lower {lower}")]
    InconsistentSeshadri { upper: i64, lower: i64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
