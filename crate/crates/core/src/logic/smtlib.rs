//! SMT-LIB 2 text for formulas and terms, plus a small s-expression reader
//! used for solver responses, query files and serialized controllers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::formula::{Formula, RelOp};
use super::term::Term;
use super::types::{is_integral, parse_rational, Rational, Sort, Var};
use super::LogicError;

const RESERVED: &[&str] = &[
    "par", "NUMERAL", "DECIMAL", "STRING", "_", "!", "as", "let", "exists", "forall", "match",
    "true", "false", "and", "or", "not", "ite", "distinct",
];

fn is_simple_symbol(s: &str) -> bool {
    const EXTRA: &str = "~!@$%^&*_-+=<>.?/";
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || EXTRA.contains(c) => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || EXTRA.contains(c)) && !RESERVED.contains(&s)
}

pub fn symbol(name: &str) -> String {
    if is_simple_symbol(name) {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

fn int_lit(n: &BigInt) -> String {
    if n.is_negative() {
        format!("(- {})", -n)
    } else {
        n.to_string()
    }
}

fn real_lit(r: &Rational) -> String {
    let body = |n: &BigInt, d: &BigInt| {
        if d.is_one() {
            format!("{n}.0")
        } else {
            format!("(/ {n}.0 {d}.0)")
        }
    };
    if r.is_negative() {
        let a = -r;
        format!("(- {})", body(a.numer(), a.denom()))
    } else {
        body(r.numer(), r.denom())
    }
}

pub fn const_to_smt(r: &Rational, real: bool) -> String {
    if real || !is_integral(r) {
        real_lit(r)
    } else {
        int_lit(r.numer())
    }
}

/// Print a term; `real` selects the real-sorted rendering (integer variables
/// coerced with `to_real`, constants as decimals).
pub fn term_to_smt(t: &Term, real: bool) -> String {
    let mut s = String::new();
    write_term(&mut s, t, real);
    s
}

fn write_term(out: &mut String, t: &Term, real: bool) {
    match t {
        Term::Const(c) => out.push_str(&const_to_smt(c, real)),
        Term::Var(v) => {
            if real && v.sort() == Sort::Int {
                let _ = write!(out, "(to_real {})", symbol(v.name()));
            } else {
                out.push_str(&symbol(v.name()));
            }
        }
        Term::Neg(t) => {
            out.push_str("(- ");
            write_term(out, t, real);
            out.push(')');
        }
        Term::Add(ts) => {
            out.push_str("(+");
            for t in ts {
                out.push(' ');
                write_term(out, t, real);
            }
            out.push(')');
        }
        Term::Mul(k, t) => {
            out.push_str("(* ");
            out.push_str(&const_to_smt(k, real));
            out.push(' ');
            write_term(out, t, real);
            out.push(')');
        }
        Term::Ite(c, a, b) => {
            out.push_str("(ite ");
            write_formula(out, c);
            out.push(' ');
            write_term(out, a, real);
            out.push(' ');
            write_term(out, b, real);
            out.push(')');
        }
    }
}

pub fn formula_to_smt(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(&mut s, f);
    s
}

fn write_junction(out: &mut String, op: &str, fs: &[Formula]) {
    match fs.len() {
        0 => out.push_str(if op == "and" { "true" } else { "false" }),
        1 => write_formula(out, &fs[0]),
        _ => {
            let _ = write!(out, "({op}");
            for g in fs {
                out.push(' ');
                write_formula(out, g);
            }
            out.push(')');
        }
    }
}

fn write_formula(out: &mut String, f: &Formula) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(a, op, b) => {
            let real = a.sort() == Sort::Real || b.sort() == Sort::Real;
            let sym = match op {
                RelOp::Lt => "<",
                RelOp::Le => "<=",
                RelOp::Eq => "=",
                RelOp::Ge => ">=",
                RelOp::Gt => ">",
                RelOp::Ne => "distinct",
            };
            let _ = write!(out, "({sym} ");
            write_term(out, a, real);
            out.push(' ');
            write_term(out, b, real);
            out.push(')');
        }
        Formula::Divides(k, t) => write_divides(out, k, t),
        Formula::BoolVar(v) => out.push_str(&symbol(v.name())),
        Formula::Not(g) => {
            out.push_str("(not ");
            write_formula(out, g);
            out.push(')');
        }
        Formula::And(fs) => write_junction(out, "and", fs),
        Formula::Or(fs) => write_junction(out, "or", fs),
        Formula::Implies(a, b) => {
            out.push_str("(=> ");
            write_formula(out, a);
            out.push(' ');
            write_formula(out, b);
            out.push(')');
        }
        Formula::Iff(a, b) => {
            out.push_str("(= ");
            write_formula(out, a);
            out.push(' ');
            write_formula(out, b);
            out.push(')');
        }
    }
}

/// `k | t` is printed as `(= (mod t k) 0)`. A term with fractional
/// coefficients over integer variables is first scaled: `k | l/L` iff
/// `kL | l`.
fn write_divides(out: &mut String, k: &BigInt, t: &Term) {
    if let Ok(lin) = t.to_linear() {
        if lin.all_int_vars() && !lin.is_integer_valued() {
            let l = lin.denominator_lcm();
            let scaled = lin.scaled(&Rational::from_integer(l.clone()));
            write_divides(out, &(k * l), &scaled.to_term());
            return;
        }
        if !lin.all_int_vars() {
            let _ = write!(out, "(and (is_int ");
            write_term(out, t, true);
            let _ = write!(out, ") (= (mod (to_int ");
            write_term(out, t, true);
            let _ = write!(out, ") {k}) 0))");
            return;
        }
    }
    out.push_str("(= (mod ");
    write_term(out, t, false);
    let _ = write!(out, " {k}) 0)");
}

/// Parsed s-expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s) => Some(s),
            Sexp::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(l) => Some(l),
            Sexp::Atom(_) => None,
        }
    }
}

impl std::fmt::Display for Sexp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(l) => {
                f.write_str("(")?;
                for (i, s) in l.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parse every s-expression in `text`. Quoted symbols lose their bars.
pub fn parse_sexps(text: &str) -> Result<Vec<Sexp>, LogicError> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    while pos < chars.len() {
        let c = chars[pos];
        match c {
            ';' => {
                while pos < chars.len() && chars[pos] != '\n' {
                    pos += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                pos += 1;
            }
            ')' => {
                let done = stack.pop().unwrap();
                let parent = stack
                    .last_mut()
                    .ok_or_else(|| LogicError::Parse("unbalanced ')'".into()))?;
                parent.push(Sexp::List(done));
                pos += 1;
            }
            '|' => {
                let start = pos + 1;
                let mut end = start;
                while end < chars.len() && chars[end] != '|' {
                    end += 1;
                }
                if end >= chars.len() {
                    return Err(LogicError::Parse("unterminated quoted symbol".into()));
                }
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..end].iter().collect()));
                pos = end + 1;
            }
            '"' => {
                let start = pos;
                let mut end = pos + 1;
                while end < chars.len() && chars[end] != '"' {
                    end += 1;
                }
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..=end.min(chars.len() - 1)].iter().collect()));
                pos = end + 1;
            }
            c if c.is_whitespace() => pos += 1,
            _ => {
                let start = pos;
                while pos < chars.len()
                    && !chars[pos].is_whitespace()
                    && !matches!(chars[pos], '(' | ')' | ';' | '|')
                {
                    pos += 1;
                }
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..pos].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(LogicError::Parse("unbalanced '('".into()));
    }
    Ok(stack.pop().unwrap())
}

pub fn parse_sexp(text: &str) -> Result<Sexp, LogicError> {
    let mut all = parse_sexps(text)?;
    if all.len() != 1 {
        return Err(LogicError::Parse(format!("expected one s-expression, found {}", all.len())));
    }
    Ok(all.pop().unwrap())
}

/// Parse a numeric literal: numerals, decimals, `(- x)`, `(/ a b)`.
pub fn parse_value(s: &Sexp) -> Option<Rational> {
    match s {
        Sexp::Atom(a) => {
            if a.starts_with('-') || a.starts_with('+') {
                return None;
            }
            parse_rational(a)
        }
        Sexp::List(l) => match l.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => parse_value(x).map(|v| -v),
            [Sexp::Atom(op), a, b] if op == "/" => {
                let a = parse_value(a)?;
                let b = parse_value(b)?;
                if b.is_zero() {
                    None
                } else {
                    Some(a / b)
                }
            }
            [Sexp::Atom(op), x] if op == "to_real" => parse_value(x),
            _ => None,
        },
    }
}

/// Symbol table used when reading formulas back.
pub type Scope = BTreeMap<String, Var>;

pub fn scope_of<'a>(vars: impl IntoIterator<Item = &'a Var>) -> Scope {
    vars.into_iter().map(|v| (v.name().to_string(), v.clone())).collect()
}

enum Parsed {
    Bool(Formula),
    Num(Term),
}

fn err(msg: impl Into<String>) -> LogicError {
    LogicError::Parse(msg.into())
}

pub fn parse_formula(s: &Sexp, scope: &Scope) -> Result<Formula, LogicError> {
    match parse_any(s, scope)? {
        Parsed::Bool(f) => Ok(f),
        Parsed::Num(_) => Err(LogicError::SortMismatch(format!("expected a formula: {s}"))),
    }
}

pub fn parse_term(s: &Sexp, scope: &Scope) -> Result<Term, LogicError> {
    match parse_any(s, scope)? {
        Parsed::Num(t) => Ok(t),
        Parsed::Bool(_) => Err(LogicError::SortMismatch(format!("expected a term: {s}"))),
    }
}

pub fn parse_formula_str(text: &str, scope: &Scope) -> Result<Formula, LogicError> {
    parse_formula(&parse_sexp(text)?, scope)
}

pub fn parse_term_str(text: &str, scope: &Scope) -> Result<Term, LogicError> {
    parse_term(&parse_sexp(text)?, scope)
}

fn parse_any(s: &Sexp, scope: &Scope) -> Result<Parsed, LogicError> {
    match s {
        Sexp::Atom(a) => match a.as_str() {
            "true" => Ok(Parsed::Bool(Formula::True)),
            "false" => Ok(Parsed::Bool(Formula::False)),
            _ => {
                if let Some(v) = scope.get(a) {
                    return Ok(if v.sort() == Sort::Bool {
                        Parsed::Bool(Formula::var(v))
                    } else {
                        Parsed::Num(Term::var(v))
                    });
                }
                parse_value(s)
                    .map(|r| Parsed::Num(Term::Const(r)))
                    .ok_or_else(|| LogicError::UnboundVariable(a.clone()))
            }
        },
        Sexp::List(items) => {
            let (head, args) = items.split_first().ok_or_else(|| err("empty application"))?;
            if let Some(r) = parse_value(s) {
                return Ok(Parsed::Num(Term::Const(r)));
            }
            if let Sexp::List(h) = head {
                // ((_ divisible k) t)
                if let [Sexp::Atom(u), Sexp::Atom(d), Sexp::Atom(k)] = h.as_slice() {
                    if u == "_" && d == "divisible" && args.len() == 1 {
                        let k: BigInt = k.parse().map_err(|_| err("bad divisor"))?;
                        return Ok(Parsed::Bool(Formula::Divides(k, parse_term(&args[0], scope)?)));
                    }
                }
                return Err(err(format!("unsupported application: {s}")));
            }
            let op = head.as_atom().unwrap();
            let formulas = || args.iter().map(|a| parse_formula(a, scope)).collect::<Result<Vec<_>, _>>();
            let terms = || args.iter().map(|a| parse_term(a, scope)).collect::<Result<Vec<_>, _>>();
            let f = match op {
                "not" => {
                    let [a] = args else { return Err(err("not takes one argument")) };
                    Parsed::Bool(Formula::Not(Box::new(parse_formula(a, scope)?)))
                }
                "and" => Parsed::Bool(Formula::And(formulas()?)),
                "or" => Parsed::Bool(Formula::Or(formulas()?)),
                "=>" => {
                    let mut fs = formulas()?;
                    let mut acc = fs.pop().ok_or_else(|| err("=> needs arguments"))?;
                    while let Some(a) = fs.pop() {
                        acc = Formula::implies(a, acc);
                    }
                    Parsed::Bool(acc)
                }
                "ite" => {
                    let [c, a, b] = args else { return Err(err("ite takes three arguments")) };
                    let c = parse_formula(c, scope)?;
                    match (parse_any(a, scope)?, parse_any(b, scope)?) {
                        (Parsed::Num(a), Parsed::Num(b)) => Parsed::Num(Term::ite(c, a, b)),
                        (Parsed::Bool(a), Parsed::Bool(b)) => Parsed::Bool(Formula::or([
                            Formula::And(vec![c.clone(), a]),
                            Formula::And(vec![Formula::not(c), b]),
                        ])),
                        _ => return Err(LogicError::SortMismatch(format!("ite branches differ: {s}"))),
                    }
                }
                "=" | "distinct" => {
                    if args.len() < 2 {
                        return Err(err(format!("{op} needs two arguments")));
                    }
                    // (= (mod t k) 0)
                    if op == "=" && args.len() == 2 {
                        if let Some(d) = parse_mod_zero(&args[0], &args[1], scope)? {
                            return Ok(Parsed::Bool(d));
                        }
                    }
                    let parsed = args.iter().map(|a| parse_any(a, scope)).collect::<Result<Vec<_>, _>>()?;
                    let mut conj = Vec::new();
                    for w in parsed.windows(2) {
                        conj.push(match (&w[0], &w[1]) {
                            (Parsed::Num(a), Parsed::Num(b)) => Formula::Atom(
                                a.clone(),
                                if op == "=" { RelOp::Eq } else { RelOp::Ne },
                                b.clone(),
                            ),
                            (Parsed::Bool(a), Parsed::Bool(b)) => {
                                let e = Formula::iff(a.clone(), b.clone());
                                if op == "=" {
                                    e
                                } else {
                                    Formula::Not(Box::new(e))
                                }
                            }
                            _ => return Err(LogicError::SortMismatch(format!("mixed sorts in {s}"))),
                        });
                    }
                    Parsed::Bool(if conj.len() == 1 { conj.pop().unwrap() } else { Formula::And(conj) })
                }
                "<" | "<=" | ">" | ">=" => {
                    let rel = match op {
                        "<" => RelOp::Lt,
                        "<=" => RelOp::Le,
                        ">" => RelOp::Gt,
                        _ => RelOp::Ge,
                    };
                    let ts = terms()?;
                    if ts.len() < 2 {
                        return Err(err(format!("{op} needs two arguments")));
                    }
                    let conj: Vec<Formula> =
                        ts.windows(2).map(|w| Formula::Atom(w[0].clone(), rel, w[1].clone())).collect();
                    Parsed::Bool(if conj.len() == 1 { conj.into_iter().next().unwrap() } else { Formula::And(conj) })
                }
                "+" => Parsed::Num(Term::Add(terms()?)),
                "-" => {
                    let mut ts = terms()?;
                    if ts.len() == 1 {
                        Parsed::Num(Term::Neg(Box::new(ts.pop().unwrap())))
                    } else {
                        let first = ts.remove(0);
                        let mut parts = vec![first];
                        parts.extend(ts.into_iter().map(|t| Term::Neg(Box::new(t))));
                        Parsed::Num(Term::Add(parts))
                    }
                }
                "*" => {
                    let ts = terms()?;
                    let mut coeff = Rational::one();
                    let mut rest: Option<Term> = None;
                    for t in ts {
                        match t {
                            Term::Const(c) => coeff *= c,
                            other => {
                                if rest.is_some() {
                                    return Err(LogicError::NonLinear(format!("{s}")));
                                }
                                rest = Some(other);
                            }
                        }
                    }
                    Parsed::Num(match rest {
                        None => Term::Const(coeff),
                        Some(t) => Term::scale(coeff, t),
                    })
                }
                "/" => {
                    let [a, b] = args else { return Err(err("/ takes two arguments")) };
                    let a = parse_term(a, scope)?;
                    let b = parse_value(b).ok_or_else(|| LogicError::NonLinear(format!("{s}")))?;
                    if b.is_zero() {
                        return Err(err("division by zero"));
                    }
                    Parsed::Num(Term::scale(Rational::one() / b, a))
                }
                "to_real" | "to_int" => {
                    let [a] = args else { return Err(err("coercion takes one argument")) };
                    Parsed::Num(parse_term(a, scope)?)
                }
                _ => return Err(err(format!("unsupported operator `{op}`"))),
            };
            Ok(f)
        }
    }
}

fn parse_mod_zero(a: &Sexp, b: &Sexp, scope: &Scope) -> Result<Option<Formula>, LogicError> {
    let (m, z) = match (a, b) {
        (Sexp::List(l), z) if l.first().and_then(Sexp::as_atom) == Some("mod") => (l, z),
        (z, Sexp::List(l)) if l.first().and_then(Sexp::as_atom) == Some("mod") => (l, z),
        _ => return Ok(None),
    };
    if parse_value(z).is_none_or(|v| !v.is_zero()) || m.len() != 3 {
        return Ok(None);
    }
    let k = parse_value(&m[2]).filter(|k| is_integral(k) && k.is_positive());
    let Some(k) = k else { return Ok(None) };
    let t = parse_term(&m[1], scope)?;
    Ok(Some(Formula::Divides(k.numer().clone(), t)))
}
