use thiserror::Error;

pub type Result<T, E = DunklError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DunklError {
    #[error("dihedral order must be at least 3, got {0}")]
    InvalidOrder(usize),

    #[error("multiplicities must be strictly positive, got {0}")]
    NonPositiveMultiplicity(f64),

    #[error("I_{n} needs {expected} multiplicity value(s)")]
    MultiplicityArity { n: usize, expected: usize },

    #[error("point ({0}, {1}) lies outside the closed Weyl chamber")]
    OutsideChamber(f64, f64),

    #[error("non-finite input")]
    NonFinite,

    #[error("|x|·|y| = {product} exceeds the evaluation guard {limit}")]
    DomainGuard { product: f64, limit: f64 },

    #[error("series did not reach tolerance {tol:e} within {max_terms} terms")]
    SeriesNotConverged { tol: f64, max_terms: usize },

    #[error("ODE step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}
