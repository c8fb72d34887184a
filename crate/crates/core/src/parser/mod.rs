//! Concrete syntax for AbC models and bπ terms, and the matching
//! pretty-printers. The grammar is documented in `docs/grammar.md`.

pub mod abc;
pub mod bpi;
pub mod lexer;
pub mod pretty;

use thiserror::Error;

pub use abc::{parse_abc, parse_closed_predicate, parse_component, parse_predicate, parse_process, parse_value, AbcFile};
pub use bpi::parse_bpi;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}
