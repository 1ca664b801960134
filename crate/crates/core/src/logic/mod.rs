//! Exact quantifier-free linear integer/real arithmetic.

mod eval;
mod formula;
pub mod smtlib;
mod term;
mod transform;
mod types;

pub use eval::{eval, eval_term};
pub use formula::{Formula, RelOp};
pub use term::{LinExpr, Term};
pub use transform::{
    canonical_atom, canonicalize, nnf, renaming, simplify, substitute, substitute_term, Assign,
    Canon, CanonAtom, Subst,
};
pub use types::{
    fmt_rational, is_integral, parse_rational, rat, ratio, Model, Rational, Sort, Value, Var,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("non-linear term: {0}")]
    NonLinear(String),
    #[error("parse error: {0}")]
    Parse(String),
}
