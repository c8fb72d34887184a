//! Workbench for the AbC calculus: attribute-based send and receive with
//! awareness, interface restriction and the bπ encoding.
//!
//! The usual entry points are [`parser::parse_abc`] for model files,
//! [`lts::explore`] for transition systems and [`equivalence::check`] for
//! bisimilarity.

pub mod bpi;
pub mod corpus;
pub mod equivalence;
pub mod error;
pub mod lts;
pub mod parser;
pub mod predicates;
pub mod semantics;
pub mod terms;

pub use error::{EvalError, ExploreError, ModelError};
pub use predicates::{ClosedPredicate, DomainContext};
pub use semantics::{Label, Message, Semantics};
pub use terms::{AttributeEnv, Component, Defs, Expr, Predicate, Process, Value};
