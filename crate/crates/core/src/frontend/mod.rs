//! Parsers for machine descriptions (`.cqs`) and queue invariants (`.qutl`).

mod cqs;
mod lexer;
mod qutl;

use std::fmt;

use serde::Serialize;

pub use cqs::parse_model;
pub use qutl::{parse_invariant_decl, parse_invariant_file, parse_qutl, parse_qutl_open, InvariantDecl};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl ParseDiagnostic {
    pub fn error(message: impl Into<String>, line: usize, column: usize) -> Self {
        Self {
            severity: Severity::Error,
            message: message.into(),
            line,
            column,
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {}: {}", self.line, self.column, sev, self.message)
    }
}

/// Source text plus the name used in diagnostics.
#[derive(Clone, Debug)]
pub struct DslSource {
    pub name: String,
    pub text: String,
}

impl DslSource {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            text: text.into(),
        }
    }
}

/// Convenience wrapper for an in-memory model.
pub fn parse_model_str(text: &str) -> Result<crate::model::CqsModel, Vec<ParseDiagnostic>> {
    parse_model(&DslSource::new("<input>", text))
}

/// Renders diagnostics as `file:line:col: severity: message` lines.
pub fn render_diagnostics(file: &str, diags: &[ParseDiagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("{file}:{d}"))
        .collect::<Vec<_>>()
        .join("\n")
}
