use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("instance atom {0} contains a variable")]
    VariableInInstance(String),
    #[error("invalid substitution: {0}")]
    InvalidSubstitution(String),
    #[error("rule {0} has an empty body")]
    EmptyBody(String),
    #[error("rule {0} has an empty head")]
    EmptyHead(String),
    #[error("invalid rule {rule}: {reason}")]
    InvalidRule { rule: String, reason: String },
    #[error("predicate {name} used with arity {first} and arity {second}")]
    ArityMismatch {
        name: String,
        first: usize,
        second: usize,
    },
    #[error("invalid knowledge base: {0}")]
    InvalidKnowledgeBase(String),
    #[error("rule {0} is not triggered by the given homomorphism")]
    NotTriggered(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("invalid derivation at step {step}: {reason}")]
    InvalidDerivation { step: usize, reason: String },
    #[error("step {0} cannot be swapped with the step after it")]
    NotPermutable(usize),
    #[error("side condition violated: {0}")]
    SideConditionViolated(String),
    #[error("graph is not cycle-free")]
    NotCycleFree,
    #[error("unknown term {0}")]
    UnknownTerm(String),
    #[error("unknown rule {0}")]
    UnknownRule(String),
}

pub type Result<T> = std::result::Result<T, Error>;
