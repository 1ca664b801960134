use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Exact rational numbers. `BigRational` keeps values in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_integral(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Format a rational as `n` or `n/d`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `n`, `-n`, `n/d` or a decimal such as `2.50`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !int_digits.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || (int_digits.is_empty() && frac.is_empty())
        {
            return None;
        }
        let digits = format!("{int_digits}{frac}");
        let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Some(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rational::from_integer(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    Bool,
    Int,
    Real,
}

impl Sort {
    pub fn is_numeric(self) -> bool {
        !matches!(self, Sort::Bool)
    }

    pub fn smt_name(self) -> &'static str {
        match self {
            Sort::Bool => "Bool",
            Sort::Int => "Int",
            Sort::Real => "Real",
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Bool => "bool",
            Sort::Int => "int",
            Sort::Real => "real",
        })
    }
}

/// A sorted variable. Identity is the (name, sort) pair; the role a variable
/// plays (state, input, next-state) is tracked by the transition system that
/// owns it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    name: Arc<str>,
    sort: Sort,
}

impl Var {
    pub fn new(name: impl AsRef<str>, sort: Sort) -> Self {
        Var { name: Arc::from(name.as_ref()), sort }
    }

    pub fn bool(name: impl AsRef<str>) -> Self {
        Var::new(name, Sort::Bool)
    }

    pub fn int(name: impl AsRef<str>) -> Self {
        Var::new(name, Sort::Int)
    }

    pub fn real(name: impl AsRef<str>) -> Self {
        Var::new(name, Sort::Real)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }

    /// The next-state copy `x'` of a state variable.
    pub fn primed(&self) -> Var {
        Var::new(format!("{}'", self.name), self.sort)
    }

    pub fn renamed(&self, name: impl AsRef<str>) -> Var {
        Var::new(name, self.sort)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.sort)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Num(Rational),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Num(_) => None,
        }
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Value::Num(r) => Some(r),
            Value::Bool(_) => None,
        }
    }

    pub fn fits(&self, sort: Sort) -> bool {
        match (self, sort) {
            (Value::Bool(_), Sort::Bool) => true,
            (Value::Num(r), Sort::Int) => is_integral(r),
            (Value::Num(_), Sort::Real) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(r) => f.write_str(&fmt_rational(r)),
        }
    }
}

/// A total assignment over an explicit variable scope.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    values: BTreeMap<Var, Value>,
}

impl Model {
    pub fn new() -> Self {
        Model::default()
    }

    /// Insert a value. Panics if the value does not fit the variable's sort;
    /// use [`Model::try_insert`] for untrusted data.
    pub fn insert(&mut self, var: Var, value: Value) {
        assert!(value.fits(var.sort()), "value {value} does not fit {var:?}");
        self.values.insert(var, value);
    }

    pub fn try_insert(&mut self, var: Var, value: Value) -> bool {
        if value.fits(var.sort()) {
            self.values.insert(var, value);
            true
        } else {
            false
        }
    }

    pub fn with(mut self, var: &Var, value: Value) -> Self {
        self.insert(var.clone(), value);
        self
    }

    pub fn get(&self, var: &Var) -> Option<&Value> {
        self.values.get(var)
    }

    pub fn num(&self, var: &Var) -> Option<&Rational> {
        self.values.get(var).and_then(Value::as_num)
    }

    pub fn contains(&self, var: &Var) -> bool {
        self.values.contains_key(var)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.values.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Value)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Restrict to the given variables (missing ones are skipped).
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Var>) -> Model {
        let mut out = Model::new();
        for v in vars {
            if let Some(val) = self.values.get(v) {
                out.values.insert(v.clone(), val.clone());
            }
        }
        out
    }

    /// Union; values from `other` win on conflict.
    pub fn extend(&mut self, other: &Model) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn remove(&mut self, var: &Var) -> Option<Value> {
        self.values.remove(var)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} = {v}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<(Var, Value)> for Model {
    fn from_iter<T: IntoIterator<Item = (Var, Value)>>(iter: T) -> Self {
        let mut m = Model::new();
        for (k, v) in iter {
            m.insert(k, v);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_normalize() {
        let r = ratio(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(ratio(1, 3) + ratio(1, 6), ratio(1, 2));
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("2.50"), Some(ratio(5, 2)));
        assert_eq!(parse_rational("-0.2"), Some(ratio(-1, 5)));
        assert_eq!(parse_rational("7/21"), Some(ratio(1, 3)));
        assert_eq!(parse_rational("12"), Some(rat(12)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn int_values_must_be_integral() {
        let mut m = Model::new();
        assert!(!m.try_insert(Var::int("x"), Value::Num(ratio(1, 2))));
        assert!(m.try_insert(Var::real("x"), Value::Num(ratio(1, 2))));
    }
}
