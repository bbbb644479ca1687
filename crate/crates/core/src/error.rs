use crate::bispectral::MembershipCertificate;
use thiserror::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong outside of programmer error.
///
/// Mathematical negatives that carry evidence (a failed membership test, a
/// violated coefficient identity) keep their witness so callers can report
/// it instead of a bare boolean.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("division by zero in exact arithmetic")]
    DivisionByZero,

    #[error("residue does not satisfy V₋₁(V₋₁ + 2I) = 0; it cannot be the residue of any solution")]
    QuadraticRelationViolated,

    #[error("seed is inconsistent: {0}")]
    SeedInconsistent(String),

    #[error("T_{0} has a kernel; only k ≥ 3 admits a blockwise inverse")]
    KNotInvertible(i64),

    #[error("matrix is not nilpotent: its N-th power is nonzero")]
    NotNilpotent,

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("series evaluation at the pole x = 0")]
    EvalAtPole,

    #[error(
        "potential does not satisfy V″ = V′V: first failure in the order-{order} coefficient \
         identity at entry ({row}, {col})"
    )]
    PotentialNotAutonomous { order: i64, row: usize, col: usize },

    #[error("theta is not a member of the bispectral algebra (failed: {})",
        .0.failed_label())]
    NotAMember(Box<MembershipCertificate>),

    #[error("neither sign convention for the correction coefficients zeroes the Λ residual")]
    SignConventionFailure,

    #[error("parse error: {0}")]
    Parse(String),
}
