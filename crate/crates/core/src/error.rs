use thiserror::Error;

use crate::terms::Value;

/// Failures while evaluating expressions, updates or substitutions.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("attribute `{0}` is undefined")]
    UndefinedAttribute(String),
    #[error("variable `{0}` is unbound")]
    UnboundVariable(String),
    #[error("operator error: {0}")]
    OperatorDomain(String),
    #[error("attribute `{0}` used as an operator argument inside a predicate")]
    AttributeUnderOperator(String),
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("`msg[i]` or `snd.a` used outside a restriction function")]
    TemplateOutsideRestriction,
    #[error("arity mismatch: expected {expected} values, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("value {value} is outside the declared domain of `{attr}`")]
    DomainViolation { attr: String, value: Value },
}

/// Static well-formedness problems of a model.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("process `{0}` is defined twice with different bodies")]
    ConflictingDefinition(String),
    #[error("domain of `{0}` is declared twice with different values")]
    ConflictingDomain(String),
    #[error("domain of `{0}` is empty")]
    EmptyDomain(String),
    #[error("definition `{name}` has free variable `{var}`")]
    OpenDefinition { name: String, var: String },
    #[error("process has free variable `{0}`")]
    OpenProcess(String),
    #[error("recursion through `{0}` is not guarded by an action")]
    UnguardedRecursion(String),
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("`{name}` expects {expected} arguments, got {found}")]
    CallArity { name: String, expected: usize, found: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Errors raised while building a transition system.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("exploration bound exceeded: {states} states discovered, depth {depth}, {frontier} states left on the frontier")]
    BoundExceeded { states: usize, depth: usize, frontier: usize },
    #[error("label universe did not stabilise after {0} rounds")]
    UniverseDiverged(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
