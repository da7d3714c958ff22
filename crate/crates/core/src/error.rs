use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ast::AstError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A message tied to a source position. Lines and columns are 1-based;
/// 0 means the construct was not read from source text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, line, column, message: message.into() }
    }

    pub fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, line, column, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        if self.line > 0 {
            write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
        } else {
            write!(f, "{sev}: {}", self.message)
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Parse(Diagnostic),
    #[error(transparent)]
    Ast(#[from] AstError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, Error>;
