use thiserror::Error;

/// Errors shared across the engine.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("exponent is not a rational p/q: {0}")]
    NonRationalExponent(String),
    #[error("sin/cos/exp argument is not linear in a single variable: {0}")]
    NonlinearTransArgument(String),
    #[error("fractional or negative power of a non-monomial expression")]
    NonMonomialFractionalPower,
    #[error("coefficient {0} has no exact rational root of index {1}")]
    NonRationalCoefficientRoot(String, u32),
    #[error("jet variable {0} is unbound at evaluation")]
    UnboundJetVar(String),
    #[error("numeric domain error: {0}")]
    Domain(String),
    #[error("total derivative would exceed the jet-order cap {cap} (needs order {needed})")]
    OrderCapExceeded { cap: u32, needed: u32 },
    #[error("invalid ansatz configuration: {0}")]
    Config(String),
    #[error("internal verification failure: {0}")]
    VerificationFailure(String),
    #[error("degenerate evaluation point set after {0} resamplings")]
    DegeneratePointSet(u32),
    #[error("dt/dt' is not an invertible single-term factor: {0}")]
    NonInvertibleTimeFactor(String),
    #[error("substitution leaves the representable class: {0}")]
    SubstitutionDomainError(String),
    #[error("leading-coefficient matrix is degenerate: {0}")]
    DegenerateLeadingCoefficient(String),
    #[error("Euler-Lagrange system is not reducible to explicit form: {0}")]
    NotReducible(String),
    #[error("state became non-finite at t = {0}")]
    NonFiniteState(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
