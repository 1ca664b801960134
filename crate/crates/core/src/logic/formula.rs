use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;

use super::term::Term;
use super::types::Var;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl RelOp {
    pub fn negate(self) -> RelOp {
        match self {
            RelOp::Lt => RelOp::Ge,
            RelOp::Le => RelOp::Gt,
            RelOp::Eq => RelOp::Ne,
            RelOp::Ne => RelOp::Eq,
            RelOp::Ge => RelOp::Lt,
            RelOp::Gt => RelOp::Le,
        }
    }

    /// The operator with its operands swapped: `a op b` iff `b op.flip() a`.
    pub fn flip(self) -> RelOp {
        match self {
            RelOp::Lt => RelOp::Gt,
            RelOp::Le => RelOp::Ge,
            RelOp::Ge => RelOp::Le,
            RelOp::Gt => RelOp::Lt,
            o => o,
        }
    }

    pub fn holds<T: PartialOrd>(self, a: &T, b: &T) -> bool {
        match self {
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
            RelOp::Ge => a >= b,
            RelOp::Gt => a > b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Eq => "=",
            RelOp::Ne => "!=",
            RelOp::Ge => ">=",
            RelOp::Gt => ">",
        }
    }
}

/// Quantifier-free LIRA formulas.
///
/// `Divides(k, t)` (`k | t`, `k > 0`, `t` integer-valued) is produced by
/// integer projection; it never comes out of the frontend.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Term, RelOp, Term),
    Divides(BigInt, Term),
    BoolVar(Var),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(lhs: Term, op: RelOp, rhs: Term) -> Formula {
        Formula::Atom(lhs, op, rhs)
    }

    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::Atom(a, RelOp::Lt, b)
    }
    pub fn le(a: Term, b: Term) -> Formula {
        Formula::Atom(a, RelOp::Le, b)
    }
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Atom(a, RelOp::Eq, b)
    }
    pub fn ge(a: Term, b: Term) -> Formula {
        Formula::Atom(a, RelOp::Ge, b)
    }
    pub fn gt(a: Term, b: Term) -> Formula {
        Formula::Atom(a, RelOp::Gt, b)
    }
    pub fn ne(a: Term, b: Term) -> Formula {
        Formula::Atom(a, RelOp::Ne, b)
    }

    pub fn var(v: &Var) -> Formula {
        Formula::BoolVar(v.clone())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            g => Formula::Not(Box::new(g)),
        }
    }

    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(gs) => out.extend(gs),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(gs) => out.extend(gs),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a, _, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Divides(_, t) => t.collect_vars(out),
            Formula::BoolVar(v) => {
                out.insert(v.clone());
            }
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    pub fn mentions_any(&self, vars: &BTreeSet<Var>) -> bool {
        self.free_vars().iter().any(|v| vars.contains(v))
    }

    /// Number of nodes, used for size reporting.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::BoolVar(_) => 1,
            Formula::Atom(..) | Formula::Divides(..) => 1,
            Formula::Not(f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Top-level conjuncts (a non-conjunction is its own single conjunct).
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(fs) => fs.iter().for_each(|g| walk(g, out)),
                Formula::True => {}
                g => out.push(g),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Atom(..) | Formula::Divides(..) | Formula::BoolVar(_) => true,
            Formula::Not(f) => matches!(**f, Formula::Atom(..) | Formula::Divides(..) | Formula::BoolVar(_)),
            _ => false,
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, fs: &[Formula], sep: &str) -> fmt::Result {
            f.write_str("(")?;
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{g}")?;
            }
            f.write_str(")")
        }
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a, op, b) => write!(f, "{a} {} {b}", op.symbol()),
            Formula::Divides(k, t) => write!(f, "{k} | {t}"),
            Formula::BoolVar(v) => write!(f, "{v}"),
            Formula::Not(g) => write!(f, "!({g})"),
            Formula::And(fs) => join(f, fs, " & "),
            Formula::Or(fs) => join(f, fs, " | "),
            Formula::Implies(a, b) => write!(f, "({a} => {b})"),
            Formula::Iff(a, b) => write!(f, "({a} <=> {b})"),
        }
    }
}
