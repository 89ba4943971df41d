use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("geometry mismatch between operands")]
    GeometryMismatch,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {what} at grid point {point}")]
    NonFinite { what: &'static str, point: usize },

    #[error("matrix is not Hermitian (defect {defect:e} at grid point {point})")]
    NotHermitian { point: usize, defect: f64 },

    #[error("metric is not positive definite at grid point {point}")]
    NotPositiveDefinite { point: usize },

    #[error("volume weight must be positive (grid point {point})")]
    NonPositiveVolume { point: usize },

    #[error("right-hand side has mean {mean:e}, exceeding the solvability bound {bound:e}")]
    MeanNotZero { mean: f64, bound: f64 },

    #[error("elliptic symbol vanishes at a non-zero frequency")]
    SingularSymbol,

    #[error("metric varies over the grid; a constant metric is required")]
    NonConstantMetric,

    #[error("complex dimension {n} is not supported here (maximum {max})")]
    UnsupportedDimension { n: usize, max: usize },

    #[error("q = {q} is out of range for complex dimension {n}")]
    QOutOfRange { q: usize, n: usize },

    #[error(
        "bundle is not q-positive: infimum {infimum:e} does not exceed threshold {threshold:e}"
    )]
    NotQPositive { infimum: f64, threshold: f64 },

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by malformed user input rather than by the numerics.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidGeometry(_)
                | Error::GeometryMismatch
                | Error::DimensionMismatch { .. }
                | Error::NonFinite { .. }
                | Error::NotHermitian { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::NonPositiveVolume { .. }
                | Error::NonConstantMetric
                | Error::UnsupportedDimension { .. }
                | Error::QOutOfRange { .. }
                | Error::InvalidTolerance(_)
                | Error::Expression(_)
                | Error::Format(_)
                | Error::Io(_)
                | Error::Csv(_)
        )
    }
}
