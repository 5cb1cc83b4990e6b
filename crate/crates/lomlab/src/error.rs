use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library reports. Variants split into three groups the
/// CLI maps onto exit codes: input validation, mathematical preconditions,
/// and numerical cross-check failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains a NaN or infinite entry")]
    NonFinite,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid tolerance: {0}")]
    BadTolerance(String),
    #[error("parse error: {0}")]
    Parse(String),

    #[error("commutant has dimension {0}; a real division algebra has dimension 1, 2 or 4")]
    BadDimension(usize),
    #[error("structure unit fails U^2 = -1 (residual {0:.3e})")]
    NotAntiInvolutive(f64),
    #[error("the commutant span does not contain the identity")]
    MissingIdentity,
    #[error("algebra is not transitive: {0}")]
    NotTransitive(String),
    #[error("interpolation has no solution (residual {residual:.3e} > bound {bound:.3e})")]
    NoSolution { residual: f64, bound: f64 },
    #[error("no suitable algebra element found after {0} attempts")]
    SearchExhausted(usize),
    #[error("eigenvalue cluster is not separated from the rest of the spectrum (gap {0:.3e})")]
    ClusterNotSeparated(f64),
    #[error("eigenvalue cluster contains zero")]
    ClusterContainsZero,
    #[error("algebra is not commutative")]
    NotCommutative,
    #[error("idempotent iteration did not converge within {0} steps")]
    NoConvergence(usize),
    #[error("envelope of a real-type algebra is the full matrix algebra")]
    RealTypeInput,
    #[error("invalid norm schedule: {0}")]
    BadSchedule(String),
    #[error("subspaces are not complementary: {0}")]
    NotComplementary(String),
    #[error("twist {0} is singular")]
    SingularTwist(usize),
    #[error("subspace is not invariant: {0}")]
    NotInvariant(String),
    #[error("linear system is singular: {0}")]
    SingularSystem(String),
    #[error("vector must be nonzero")]
    ZeroVector,
    #[error("invalid exponent: {0}")]
    BadExponent(String),
    #[error("value exceeds exact integer range: {0}")]
    ValueTooLarge(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical cross-check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    /// Variant name, stable across releases; used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFinite => "NonFinite",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::BadTolerance(_) => "BadTolerance",
            Error::Parse(_) => "Parse",
            Error::BadDimension(_) => "BadDimension",
            Error::NotAntiInvolutive(_) => "NotAntiInvolutive",
            Error::MissingIdentity => "MissingIdentity",
            Error::NotTransitive(_) => "NotTransitive",
            Error::NoSolution { .. } => "NoSolution",
            Error::SearchExhausted(_) => "SearchExhausted",
            Error::ClusterNotSeparated(_) => "ClusterNotSeparated",
            Error::ClusterContainsZero => "ClusterContainsZero",
            Error::NotCommutative => "NotCommutative",
            Error::NoConvergence(_) => "NoConvergence",
            Error::RealTypeInput => "RealTypeInput",
            Error::BadSchedule(_) => "BadSchedule",
            Error::NotComplementary(_) => "NotComplementary",
            Error::SingularTwist(_) => "SingularTwist",
            Error::NotInvariant(_) => "NotInvariant",
            Error::SingularSystem(_) => "SingularSystem",
            Error::ZeroVector => "ZeroVector",
            Error::BadExponent(_) => "BadExponent",
            Error::ValueTooLarge(_) => "ValueTooLarge",
            Error::Precondition(_) => "Precondition",
            Error::Inconsistent(_) => "Inconsistent",
        }
    }

    /// Input could not be read or validated (as opposed to a mathematical
    /// precondition failing on well-formed input).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonFinite | Error::ShapeMismatch(_) | Error::BadTolerance(_) | Error::Parse(_)
        )
    }
}
