use thiserror::Error;

/// Unified error type for the resolution engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("blow-up centre is not a face of the fan: {0}")]
    InvalidCenter(String),
    #[error("chart data is inconsistent: {0}")]
    InvalidChart(String),
    #[error("binomial sides share a variable: {0}")]
    SharedSupport(String),
    #[error("binomial normalizes to zero")]
    ZeroBinomial,
    #[error("lattice quotient has torsion: invariant factor {0} > 1")]
    TorsionError(i64),
    #[error("generator is not admissible on this face: {0}")]
    NotAdmissible(String),
    #[error("derivative set is empty")]
    EmptyDerivativeSet,
    #[error("order exceeds the generator degree: {0}")]
    InvalidOrder(String),
    #[error("no initial exponent on the divisor variables: {0}")]
    NoXInitial(String),
    #[error("Hilbert–Samuel maxima are incomparable across charts")]
    IncomparableMaxima,
    #[error("procedure exceeded its step bound: {0}")]
    NonTermination(String),
    #[error("centre is not permissible for the marked ideal: {0}")]
    NotPermissible(String),
    #[error("invariant failed to decrease: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
