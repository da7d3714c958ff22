//! Modular answer set programs: syntax, second-order semantics, bounded
//! evaluation, structural analyses, reductions and equivalence checks.

pub mod analysis;
pub mod ast;
pub mod checks;
pub mod cli;
pub mod corpus;
pub mod equivalence;
pub mod error;
pub mod eval;
pub mod gen;
pub mod oracle;
pub mod parser;
pub mod reductions;
pub mod sm;

pub use error::{Diagnostic, Error, Result};
