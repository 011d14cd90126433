use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix required to be positive definite failed its Cholesky pivot check.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// Vector or matrix dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Every exponential observation weight underflowed to zero.
    #[error("all observation weights underflowed to zero")]
    DegenerateWeights,

    /// The (reweighted) scatter matrix is singular, e.g. too few or collinear rows.
    #[error("scatter matrix is singular or not positive definite")]
    SingularScatter,

    /// The no-short-selling active-set solution failed its KKT verification.
    /// Indicates an internal solver defect rather than bad user input.
    #[error("active-set solution failed KKT verification")]
    InfeasibleKkt,

    /// Requested portfolio variance lies below the minimum-variance portfolio.
    #[error("target variance {target} is below the minimum attainable {minimum}")]
    TargetBelowMinimumVariance { target: f64, minimum: f64 },

    /// The risk-aversion bisection bracket does not contain the target variance.
    #[error("target variance {target} is outside the bisection range")]
    BisectionRangeExhausted { target: f64 },

    /// Malformed input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A numeric cell is NaN or infinite.
    #[error("non-finite value at line {line}, column {column}")]
    NonFiniteValue { line: usize, column: usize },

    /// The input has fewer rows than the operation requires.
    #[error("too few rows: need at least {required}, got {actual}")]
    TooFewRows { required: usize, actual: usize },

    /// An argument violates its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the command-line front end maps this error to:
    /// 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::Parse { .. }
            | Error::NonFiniteValue { .. }
            | Error::TooFewRows { .. }
            | Error::Io(_) => 2,
            Error::NotPositiveDefinite
            | Error::DimensionMismatch { .. }
            | Error::DegenerateWeights
            | Error::SingularScatter
            | Error::InfeasibleKkt
            | Error::TargetBelowMinimumVariance { .. }
            | Error::BisectionRangeExhausted { .. } => 3,
        }
    }
}
