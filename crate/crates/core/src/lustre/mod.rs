//! Lustre subset: single-clock dataflow nodes with `pre`, `->`, asserts,
//! inlined node calls and two structured-comment directives:
//!
//! ```text
//! --%REALIZABLE i1, i2;   -- inputs chosen by the environment
//! --%PROPERTY ok;         -- the guarantee variable
//! ```

pub mod ast;
pub mod elaborate;
pub mod interp;
mod lexer;
mod parser;
pub mod printer;

use std::fmt;

pub use ast::Program;
pub use elaborate::{elaborate, CExpr, CheckedContract};
pub use parser::parse;

#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

/// Spans never take part in structural comparisons of syntax trees.
impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, span, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}: {}", self.span, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LustreError {
    #[error("syntax error at {0}")]
    Syntax(Diagnostic),
    #[error("sort mismatch at {0}")]
    SortMismatch(Diagnostic),
    #[error("unknown identifier at {0}")]
    UnknownIdentifier(Diagnostic),
    #[error("multiple definitions at {0}")]
    MultipleDefinitions(Diagnostic),
    #[error("missing definition at {0}")]
    MissingDefinition(Diagnostic),
    #[error("illegal pre at {0}")]
    IllegalPre(Diagnostic),
    #[error("recursive node call at {0}")]
    RecursiveNodeCall(Diagnostic),
    #[error("unsupported construct at {0}")]
    Unsupported(Diagnostic),
    #[error("bad directive at {0}")]
    Directive(Diagnostic),
}

impl LustreError {
    pub fn diagnostic(&self) -> &Diagnostic {
        match self {
            LustreError::Syntax(d)
            | LustreError::SortMismatch(d)
            | LustreError::UnknownIdentifier(d)
            | LustreError::MultipleDefinitions(d)
            | LustreError::MissingDefinition(d)
            | LustreError::IllegalPre(d)
            | LustreError::RecursiveNodeCall(d)
            | LustreError::Unsupported(d)
            | LustreError::Directive(d) => d,
        }
    }
}

/// Parse and elaborate in one go.
pub fn load(text: &str) -> Result<CheckedContract, LustreError> {
    elaborate(&parse(text)?)
}
