use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    Domain(String),
    /// A series required by the operation does not converge absolutely.
    Divergence(String),
    /// The requested tolerance was not reached within the term budget.
    Tolerance { requested: f64, reached: f64, terms: usize },
    /// A closed-form predicate and its numerical evidence disagree.
    Inconsistency(String),
    /// A matrix expected to be Hermitian is not.
    NotHermitian { deviation: f64 },
    /// The operator failed the a-contraction certification.
    NotContractive { min_eigenvalue: f64 },
    /// A Hermitian matrix that must be coercive has a too small eigenvalue.
    NotCoercive { min_eigenvalue: f64, threshold: f64 },
    /// The model truncation depth leaves a tail above tolerance.
    Depth { depth: usize, tail: f64 },
    /// A stated hypothesis of the operation does not hold.
    Precondition(String),
    /// The spectrum of the operator leaves the closed unit disc.
    SpectralRadius { estimate: f64 },
    /// Matrix shapes do not fit together.
    Dimension(String),
    /// A named stage of a multi-step pipeline failed.
    Refused { stage: &'static str, cause: Box<Error> },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Divergence(msg) => write!(f, "divergent series: {msg}"),
            Error::Tolerance { requested, reached, terms } => write!(
                f,
                "tolerance {requested:e} not reached after {terms} terms (best {reached:e})"
            ),
            Error::Inconsistency(msg) => write!(f, "inconsistent evidence: {msg}"),
            Error::NotHermitian { deviation } => {
                write!(f, "matrix is not Hermitian (deviation {deviation:e})")
            }
            Error::NotContractive { min_eigenvalue } => write!(
                f,
                "operator is not an a-contraction (min eigenvalue {min_eigenvalue:e})"
            ),
            Error::NotCoercive { min_eigenvalue, threshold } => write!(
                f,
                "operator is not coercive (min eigenvalue {min_eigenvalue:e} <= {threshold:e})"
            ),
            Error::Depth { depth, tail } => {
                write!(f, "truncation depth {depth} leaves tail {tail:e}")
            }
            Error::Precondition(msg) => write!(f, "precondition failed: {msg}"),
            Error::SpectralRadius { estimate } => {
                write!(f, "spectral radius {estimate} exceeds 1")
            }
            Error::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::Refused { stage, cause } => write!(f, "refused at stage {stage}: {cause}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
