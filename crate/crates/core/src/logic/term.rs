use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::formula::Formula;
use super::types::{fmt_rational, is_integral, rat, Rational, Sort, Var};
use super::LogicError;

/// Linear arithmetic terms. Term-level `Ite` only appears in Skolem terms
/// and frontend sugar; the projection works on [`LinExpr`] instead.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(Rational),
    Var(Var),
    Neg(Box<Term>),
    Add(Vec<Term>),
    Mul(Rational, Box<Term>),
    Ite(Box<Formula>, Box<Term>, Box<Term>),
}

impl Term {
    pub fn constant(r: Rational) -> Term {
        Term::Const(r)
    }

    pub fn int(n: i64) -> Term {
        Term::Const(rat(n))
    }

    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn scale(k: Rational, t: Term) -> Term {
        Term::Mul(k, Box::new(t))
    }

    pub fn ite(c: Formula, t: Term, e: Term) -> Term {
        Term::Ite(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn sum(ts: impl IntoIterator<Item = Term>) -> Term {
        let ts: Vec<Term> = ts.into_iter().collect();
        match ts.len() {
            0 => Term::int(0),
            1 => ts.into_iter().next().unwrap(),
            _ => Term::Add(ts),
        }
    }

    /// Sort of the term: `Int` when every leaf is integer-valued.
    pub fn sort(&self) -> Sort {
        if self.is_integer_valued() {
            Sort::Int
        } else {
            Sort::Real
        }
    }

    fn is_integer_valued(&self) -> bool {
        match self {
            Term::Const(c) => is_integral(c),
            Term::Var(v) => v.sort() == Sort::Int,
            Term::Neg(t) => t.is_integer_valued(),
            Term::Add(ts) => ts.iter().all(Term::is_integer_valued),
            Term::Mul(k, t) => is_integral(k) && t.is_integer_valued(),
            Term::Ite(_, a, b) => a.is_integer_valued() && b.is_integer_valued(),
        }
    }

    pub fn has_ite(&self) -> bool {
        match self {
            Term::Const(_) | Term::Var(_) => false,
            Term::Neg(t) | Term::Mul(_, t) => t.has_ite(),
            Term::Add(ts) => ts.iter().any(Term::has_ite),
            Term::Ite(..) => true,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Neg(t) | Term::Mul(_, t) => t.collect_vars(out),
            Term::Add(ts) => ts.iter().for_each(|t| t.collect_vars(out)),
            Term::Ite(c, a, b) => {
                c.collect_vars(out);
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

    /// Linear normal form. Fails on term-level `Ite`.
    pub fn to_linear(&self) -> Result<LinExpr, LogicError> {
        Ok(match self {
            Term::Const(c) => LinExpr::constant(c.clone()),
            Term::Var(v) => {
                if !v.sort().is_numeric() {
                    return Err(LogicError::SortMismatch(format!(
                        "boolean variable {v} used as a number"
                    )));
                }
                LinExpr::var(v)
            }
            Term::Neg(t) => -t.to_linear()?,
            Term::Add(ts) => {
                let mut acc = LinExpr::zero();
                for t in ts {
                    acc = acc + t.to_linear()?;
                }
                acc
            }
            Term::Mul(k, t) => t.to_linear()?.scaled(k),
            Term::Ite(..) => {
                return Err(LogicError::NonLinear("term-level if-then-else".into()))
            }
        })
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => f.write_str(&fmt_rational(c)),
            Term::Var(v) => write!(f, "{v}"),
            Term::Neg(t) => write!(f, "-({t})"),
            Term::Add(ts) => {
                f.write_str("(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
            Term::Mul(k, t) => write!(f, "{}*{t}", fmt_rational(k)),
            Term::Ite(c, a, b) => write!(f, "ite({c}, {a}, {b})"),
        }
    }
}

/// `Σ coeff·var + constant` with no zero coefficients stored.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct LinExpr {
    coeffs: BTreeMap<Var, Rational>,
    constant: Rational,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr { coeffs: BTreeMap::new(), constant: Rational::zero() }
    }

    pub fn constant(c: Rational) -> Self {
        LinExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(v: &Var) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v.clone(), Rational::one());
        LinExpr { coeffs, constant: Rational::zero() }
    }

    pub fn coeff(&self, v: &Var) -> Rational {
        self.coeffs.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Var, &Rational)> {
        self.coeffs.iter()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn scaled(mut self, k: &Rational) -> Self {
        if k.is_zero() {
            return LinExpr::zero();
        }
        for c in self.coeffs.values_mut() {
            *c = &*c * k;
        }
        self.constant = &self.constant * k;
        self
    }

    pub fn add_term(&mut self, v: &Var, k: &Rational) {
        let entry = self.coeffs.entry(v.clone()).or_insert_with(Rational::zero);
        *entry = &*entry + k;
        if entry.is_zero() {
            self.coeffs.remove(v);
        }
    }

    /// Drop `v` from the expression, returning its coefficient.
    pub fn take(&mut self, v: &Var) -> Rational {
        self.coeffs.remove(v).unwrap_or_else(Rational::zero)
    }

    /// Replace `v` by `e`.
    pub fn substitute(&self, v: &Var, e: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        let k = out.take(v);
        if k.is_zero() {
            out
        } else {
            out + e.clone().scaled(&k)
        }
    }

    /// True when every variable is integer-sorted and every coefficient and
    /// the constant are integers.
    pub fn is_integer_valued(&self) -> bool {
        is_integral(&self.constant)
            && self.coeffs.iter().all(|(v, k)| v.sort() == Sort::Int && is_integral(k))
    }

    pub fn all_int_vars(&self) -> bool {
        self.coeffs.keys().all(|v| v.sort() == Sort::Int)
    }

    /// Least common multiple of all denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        let mut l = self.constant.denom().clone();
        for k in self.coeffs.values() {
            l = l.lcm(k.denom());
        }
        l
    }

    /// Gcd of the numerators of the variable coefficients (1 when constant).
    pub fn coeff_gcd(&self) -> BigInt {
        let mut g = BigInt::zero();
        for k in self.coeffs.values() {
            g = g.gcd(k.numer());
        }
        if g.is_zero() {
            BigInt::one()
        } else {
            g.abs()
        }
    }

    pub fn eval_with(&self, lookup: impl Fn(&Var) -> Option<Rational>) -> Option<Rational> {
        let mut acc = self.constant.clone();
        for (v, k) in &self.coeffs {
            acc += k * lookup(v)?;
        }
        Some(acc)
    }

    pub fn to_term(&self) -> Term {
        let mut parts = Vec::new();
        for (v, k) in &self.coeffs {
            if k.is_one() {
                parts.push(Term::Var(v.clone()));
            } else if (-k).is_one() {
                parts.push(Term::Neg(Box::new(Term::Var(v.clone()))));
            } else {
                parts.push(Term::Mul(k.clone(), Box::new(Term::Var(v.clone()))));
            }
        }
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(Term::Const(self.constant.clone()));
        }
        Term::sum(parts)
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        for (v, k) in rhs.coeffs {
            self.add_term(&v, &k);
        }
        self.constant += rhs.constant;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + (-rhs)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scaled(&-Rational::one())
    }
}

impl Mul<&Rational> for LinExpr {
    type Output = LinExpr;
    fn mul(self, k: &Rational) -> LinExpr {
        self.scaled(k)
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}
