use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("matrix is rank deficient (column {column})")]
    RankDeficient { column: usize },
    #[error("iterative factorization did not converge: {0}")]
    ConvergenceFailure(&'static str),
    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("triangular matrix has a zero diagonal entry at {index}")]
    SingularTriangular { index: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("convergence curve is not monotone at index {index}")]
    NotMonotone { index: usize },
    #[error("convergence curve has zero initial residual")]
    ZeroInitialResidual,
    #[error("invalid convergence curve: {0}")]
    InvalidCurve(String),
    #[error("residual decrease vector is invalid: {0}")]
    InvalidDecrease(String),

    #[error("operator is singular on the Krylov space (iteration {iteration})")]
    SingularOperator { iteration: usize },
    #[error("preconditioner is singular")]
    SingularPreconditioner,

    #[error("prescribed spectrum contains zero at index {index}")]
    ZeroEigenvalue { index: usize },
    #[error("prescribed spectrum spans {ratio:.3e} in modulus, above the supported 1e10")]
    SpectrumRange { ratio: f64 },
    #[error("curve length {length} exceeds dimension {n}")]
    LengthExceedsDimension { length: usize, n: usize },
    #[error("constructed system breaks down at {realized} instead of {expected}")]
    BreakdownMismatch { expected: usize, realized: usize },
    #[error("curve lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no link matrix exists for this pair: {0}")]
    InfeasiblePair(String),
    #[error("trailing decrease entry is zero")]
    ZeroTrailingEntry,
    #[error("singular values of the link do not match the weight (relative error {0:.3e})")]
    SingularValueMismatch(f64),
    #[error("link matrix does not map the curves (relative residual {0:.3e})")]
    LinkMismatch(f64),
    #[error("bases are not nested consistently (relative block residual {0:.3e})")]
    BasisMismatch(f64),
    #[error("residual basis is numerically rank deficient")]
    RankDeficientBasis,
}

impl Error {
    /// True for errors caused by invalid input, false for numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::DimensionMismatch(_)
                | Error::NonFinite(_)
                | Error::NotHermitian(_)
                | Error::NotPositiveDefinite
                | Error::NotUnitary(_)
                | Error::NotMonotone { .. }
                | Error::ZeroInitialResidual
                | Error::InvalidCurve(_)
                | Error::InvalidDecrease(_)
                | Error::ZeroEigenvalue { .. }
                | Error::SpectrumRange { .. }
                | Error::LengthExceedsDimension { .. }
                | Error::LengthMismatch { .. }
                | Error::InfeasiblePair(_)
                | Error::ZeroTrailingEntry
                | Error::SingularValueMismatch(_)
                | Error::LinkMismatch(_)
        )
    }
}
