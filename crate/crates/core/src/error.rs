use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operands carry different irrational tags.
    #[error("incompatible scalar basis: {0}")]
    IncompatibleBasis(String),

    #[error("comparison did not separate after {budget} oracle refinements")]
    RefinementBudgetExhausted { budget: u32 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("invalid parity tail: {0}")]
    InvalidTail(String),

    /// The result would need more parity tails than the budget allows.
    #[error("representation overflow: {0}")]
    RepresentationOverflow(String),

    /// The operation is not defined on this kind of set (e.g. rotating a tail).
    #[error("unsupported representation: {0}")]
    UnsupportedRepresentation(String),

    #[error("invalid tower set: {0}")]
    InvalidTowerSet(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("component budget exceeded: {count} > {budget}")]
    ComponentBudget { count: usize, budget: usize },

    #[error("parse error: {0}")]
    Parse(String),
}
