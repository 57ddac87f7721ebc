use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("cannot evaluate a homogeneous component at the origin")]
    ZeroPoint,
    #[error("grid component cannot be resolved at this point: {0}")]
    GridResolution(String),
    #[error("jet table exhausted: need order {needed}, have {available}")]
    JetExhausted { needed: usize, available: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("symbol has no nonzero leading component")]
    EmptyExpansion,
    #[error("symbol is not elliptic (margin {margin:e})")]
    NotElliptic { margin: f64 },
    #[error("symbol is not Lambda-elliptic for the requested ray(s) (margin {margin:e})")]
    NotLambdaElliptic { margin: f64 },
    #[error("lambda = {0} meets the spectrum of the principal symbol")]
    SingularResolvent(Complex64),
    #[error("jet budget too small: {0}")]
    JetBudget(String),
    #[error("assumption (A) violated: {0}")]
    AssumptionA(String),
    #[error("order {0} lies in the pole set of the finite-part integral")]
    IntegerOrderPole(Complex64),
    #[error("expansion too short: {0}")]
    InsufficientExpansion(String),
    #[error("remainder does not decay fast enough: {0}")]
    TailDivergence(String),
    #[error("Laurent fit is ill-conditioned: {0}")]
    FitIllConditioned(String),
    #[error("z = {0} is a pole of the spectral function")]
    PolePoint(Complex64),
    #[error("symbol is not self-adjoint (deviation {0:e})")]
    NotSelfAdjoint(f64),
    #[error("symbol not supported by the Hermite oracle: {0}")]
    UnsupportedSymbol(String),
    #[error("requested {requested} eigenvalues but only {trusted} are in the trusted block")]
    TruncationUntrusted { requested: usize, trusted: usize },
    #[error("spectral sum diverges at z = {0}")]
    Divergent(Complex64),
    #[error("operator is not trace class (order {0})")]
    NotTraceClass(Complex64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable machine-readable identifier, used in CLI result files and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ZeroPoint => "zero_point",
            Error::GridResolution(_) => "grid_resolution",
            Error::JetExhausted { .. } => "jet_exhausted",
            Error::DimMismatch(_) => "dim_mismatch",
            Error::EmptyExpansion => "empty_expansion",
            Error::NotElliptic { .. } => "not_elliptic",
            Error::NotLambdaElliptic { .. } => "not_lambda_elliptic",
            Error::SingularResolvent(_) => "singular_resolvent",
            Error::JetBudget(_) => "jet_budget",
            Error::AssumptionA(_) => "assumption_a",
            Error::IntegerOrderPole(_) => "integer_order_pole",
            Error::InsufficientExpansion(_) => "insufficient_expansion",
            Error::TailDivergence(_) => "tail_divergence",
            Error::FitIllConditioned(_) => "fit_ill_conditioned",
            Error::PolePoint(_) => "pole_point",
            Error::NotSelfAdjoint(_) => "not_self_adjoint",
            Error::UnsupportedSymbol(_) => "unsupported_symbol",
            Error::TruncationUntrusted { .. } => "truncation_untrusted",
            Error::Divergent(_) => "divergent",
            Error::NotTraceClass(_) => "not_trace_class",
            Error::Invalid(_) => "invalid",
        }
    }

    /// Input-validation failures, as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_)
                | Error::DimMismatch(_)
                | Error::EmptyExpansion
                | Error::UnsupportedSymbol(_)
                | Error::TruncationUntrusted { .. }
        )
    }
}
