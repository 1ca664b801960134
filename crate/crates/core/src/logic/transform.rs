use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::formula::{Formula, RelOp};
use super::term::{LinExpr, Term};
use super::types::{is_integral, Rational, Sort, Var};
use super::LogicError;

/// The image of a variable under a substitution.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assign {
    Num(Term),
    Bool(Formula),
}

impl Assign {
    pub fn var(v: &Var) -> Assign {
        if v.sort() == Sort::Bool {
            Assign::Bool(Formula::var(v))
        } else {
            Assign::Num(Term::var(v))
        }
    }
}

impl std::fmt::Display for Assign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Assign::Num(t) => write!(f, "{t}"),
            Assign::Bool(g) => write!(f, "{g}"),
        }
    }
}

pub type Subst = BTreeMap<Var, Assign>;

/// Substitution mapping every variable in `from` to the matching one in `to`.
pub fn renaming(from: &[Var], to: &[Var]) -> Subst {
    from.iter().zip(to).map(|(a, b)| (a.clone(), Assign::var(b))).collect()
}

fn check_sorts(sigma: &Subst) -> Result<(), LogicError> {
    for (v, a) in sigma {
        let ok = matches!(
            (v.sort(), a),
            (Sort::Bool, Assign::Bool(_)) | (Sort::Int | Sort::Real, Assign::Num(_))
        );
        if !ok {
            return Err(LogicError::SortMismatch(format!("cannot substitute {a} for {v:?}")));
        }
    }
    Ok(())
}

pub fn substitute_term(t: &Term, sigma: &Subst) -> Result<Term, LogicError> {
    check_sorts(sigma)?;
    Ok(subst_term(t, sigma))
}

fn subst_term(t: &Term, sigma: &Subst) -> Term {
    match t {
        Term::Const(_) => t.clone(),
        Term::Var(v) => match sigma.get(v) {
            Some(Assign::Num(r)) => r.clone(),
            _ => t.clone(),
        },
        Term::Neg(t) => Term::Neg(Box::new(subst_term(t, sigma))),
        Term::Add(ts) => Term::Add(ts.iter().map(|t| subst_term(t, sigma)).collect()),
        Term::Mul(k, t) => Term::Mul(k.clone(), Box::new(subst_term(t, sigma))),
        Term::Ite(c, a, b) => Term::Ite(
            Box::new(subst(c, sigma)),
            Box::new(subst_term(a, sigma)),
            Box::new(subst_term(b, sigma)),
        ),
    }
}

/// Simultaneous, sort-preserving substitution.
pub fn substitute(f: &Formula, sigma: &Subst) -> Result<Formula, LogicError> {
    check_sorts(sigma)?;
    Ok(subst(f, sigma))
}

fn subst(f: &Formula, sigma: &Subst) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(a, op, b) => Formula::Atom(subst_term(a, sigma), *op, subst_term(b, sigma)),
        Formula::Divides(k, t) => Formula::Divides(k.clone(), subst_term(t, sigma)),
        Formula::BoolVar(v) => match sigma.get(v) {
            Some(Assign::Bool(g)) => g.clone(),
            _ => f.clone(),
        },
        Formula::Not(g) => Formula::Not(Box::new(subst(g, sigma))),
        Formula::And(fs) => Formula::And(fs.iter().map(|g| subst(g, sigma)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|g| subst(g, sigma)).collect()),
        Formula::Implies(a, b) => Formula::implies(subst(a, sigma), subst(b, sigma)),
        Formula::Iff(a, b) => Formula::iff(subst(a, sigma), subst(b, sigma)),
    }
}

/// Negation normal form: negations only on boolean variables and
/// divisibility atoms, `=>`/`<=>` eliminated, `!=` split into `< | >`.
pub fn nnf(f: &Formula) -> Formula {
    to_nnf(f, true)
}

fn to_nnf(f: &Formula, pos: bool) -> Formula {
    match f {
        Formula::True => {
            if pos {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::False => {
            if pos {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::Atom(a, op, b) => {
            let op = if pos { *op } else { op.negate() };
            if op == RelOp::Ne {
                Formula::Or(vec![
                    Formula::Atom(a.clone(), RelOp::Lt, b.clone()),
                    Formula::Atom(a.clone(), RelOp::Gt, b.clone()),
                ])
            } else {
                Formula::Atom(a.clone(), op, b.clone())
            }
        }
        Formula::Divides(..) | Formula::BoolVar(_) => {
            if pos {
                f.clone()
            } else {
                Formula::Not(Box::new(f.clone()))
            }
        }
        Formula::Not(g) => to_nnf(g, !pos),
        Formula::And(fs) => {
            let parts = fs.iter().map(|g| to_nnf(g, pos));
            if pos {
                Formula::and(parts)
            } else {
                Formula::or(parts)
            }
        }
        Formula::Or(fs) => {
            let parts = fs.iter().map(|g| to_nnf(g, pos));
            if pos {
                Formula::or(parts)
            } else {
                Formula::and(parts)
            }
        }
        Formula::Implies(a, b) => {
            if pos {
                Formula::or([to_nnf(a, false), to_nnf(b, true)])
            } else {
                Formula::and([to_nnf(a, true), to_nnf(b, false)])
            }
        }
        Formula::Iff(a, b) => {
            if pos {
                Formula::or([
                    Formula::and([to_nnf(a, true), to_nnf(b, true)]),
                    Formula::and([to_nnf(a, false), to_nnf(b, false)]),
                ])
            } else {
                Formula::or([
                    Formula::and([to_nnf(a, true), to_nnf(b, false)]),
                    Formula::and([to_nnf(a, false), to_nnf(b, true)]),
                ])
            }
        }
    }
}

/// A comparison `lin op constant` with `lin` in canonical orientation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonAtom {
    pub lin: LinExpr,
    pub op: RelOp,
    pub rhs: Rational,
}

impl CanonAtom {
    pub fn to_formula(&self) -> Formula {
        Formula::Atom(self.lin.to_term(), self.op, Term::Const(self.rhs.clone()))
    }
}

pub enum Canon {
    Const(bool),
    Atom(CanonAtom),
}

/// Canonical form of `e op 0`.
///
/// Integer atoms get integer coefficients divided by their gcd, tightened
/// constants and no strict operators; real atoms get leading coefficient 1.
/// The leading coefficient is positive in both cases.
pub fn canonical_atom(e: LinExpr, op: RelOp) -> Canon {
    if e.is_constant() {
        let c = e.constant_part().clone();
        return Canon::Const(op.holds(&c, &Rational::zero()));
    }
    let mut e = e;
    let mut op = op;
    let lead = e.terms().next().map(|(_, k)| k.clone()).unwrap();
    if e.all_int_vars() {
        let l = e.denominator_lcm();
        e = e.scaled(&Rational::from_integer(l));
        let g = e.coeff_gcd();
        let mut scale = Rational::new(BigInt::one(), g.clone());
        if lead.is_negative() {
            scale = -scale;
            op = op.flip();
        }
        // lin + c op 0, where lin has integer coefficients with gcd g.
        let mut lin = e.clone();
        let c = lin.constant_part().clone();
        lin = lin - LinExpr::constant(c.clone());
        let lin = lin.scaled(&scale);
        let rhs = -(c * &scale);
        // lin op rhs, lin integer-valued
        let (op, rhs) = match op {
            RelOp::Lt => (RelOp::Le, (rhs - Rational::one()).ceil()),
            RelOp::Le => (RelOp::Le, rhs.floor()),
            RelOp::Gt => (RelOp::Ge, (rhs + Rational::one()).floor()),
            RelOp::Ge => (RelOp::Ge, rhs.ceil()),
            RelOp::Eq => {
                if !is_integral(&rhs) {
                    return Canon::Const(false);
                }
                (RelOp::Eq, rhs)
            }
            RelOp::Ne => {
                if !is_integral(&rhs) {
                    return Canon::Const(true);
                }
                (RelOp::Ne, rhs)
            }
        };
        Canon::Atom(CanonAtom { lin, op, rhs })
    } else {
        let mut scale = Rational::one() / lead.abs();
        if lead.is_negative() {
            scale = -scale;
            op = op.flip();
        }
        let e = e.scaled(&scale);
        let c = e.constant_part().clone();
        let lin = e - LinExpr::constant(c.clone());
        Canon::Atom(CanonAtom { lin, op, rhs: -c })
    }
}

pub fn canonicalize(lhs: &Term, op: RelOp, rhs: &Term) -> Option<Canon> {
    let l = lhs.to_linear().ok()?;
    let r = rhs.to_linear().ok()?;
    Some(canonical_atom(l - r, op))
}

/// Equivalence-preserving cleanup: constant folding, canonical atoms,
/// flattening, duplicate and complement detection, and bound merging inside
/// conjunctions. Idempotent.
pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::BoolVar(_) => f.clone(),
        Formula::Atom(a, op, b) => match canonicalize(a, *op, b) {
            Some(Canon::Const(v)) => bool_formula(v),
            Some(Canon::Atom(c)) => c.to_formula(),
            None => Formula::Atom(a.clone(), *op, b.clone()),
        },
        Formula::Divides(k, t) => simplify_divides(k, t),
        Formula::Not(g) => negate_simplified(simplify(g)),
        Formula::And(fs) => simplify_junction(fs.iter().map(simplify), true),
        Formula::Or(fs) => simplify_junction(fs.iter().map(simplify), false),
        Formula::Implies(a, b) => {
            let a = simplify(a);
            let b = simplify(b);
            simplify_junction([negate_simplified(a), b].into_iter(), false)
        }
        Formula::Iff(a, b) => {
            let a = simplify(a);
            let b = simplify(b);
            match (&a, &b) {
                (Formula::True, _) => b,
                (_, Formula::True) => a,
                (Formula::False, _) => negate_simplified(b),
                (_, Formula::False) => negate_simplified(a),
                _ if a == b => Formula::True,
                _ => Formula::iff(a, b),
            }
        }
    }
}

fn bool_formula(v: bool) -> Formula {
    if v {
        Formula::True
    } else {
        Formula::False
    }
}

fn simplify_divides(k: &BigInt, t: &Term) -> Formula {
    let l = match t.to_linear() {
        Ok(l) if l.all_int_vars() => l,
        _ => return Formula::Divides(k.clone(), t.clone()),
    };
    // k | l/L  iff  kL | l  for integer-valued l.
    let den = l.denominator_lcm();
    let k = k * &den;
    let l = l.scaled(&Rational::from_integer(den));
    let reduce = |c: &Rational| Rational::from_integer(c.numer().mod_floor(&k));
    let mut out = LinExpr::constant(reduce(l.constant_part()));
    for (v, c) in l.terms() {
        out.add_term(v, &reduce(c));
    }
    if out.is_constant() {
        return bool_formula(out.constant_part().is_zero());
    }
    if k.is_one() {
        return Formula::True;
    }
    Formula::Divides(k, out.to_term())
}

/// Negate an already simplified formula, keeping the result simplified.
fn negate_simplified(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(g) => *g,
        Formula::Atom(a, op, b) => match canonicalize(&a, op.negate(), &b) {
            Some(Canon::Const(v)) => bool_formula(v),
            Some(Canon::Atom(c)) => c.to_formula(),
            None => Formula::Not(Box::new(Formula::Atom(a, op, b))),
        },
        g => Formula::Not(Box::new(g)),
    }
}

fn complement_of(f: &Formula) -> Formula {
    match f {
        Formula::Not(g) => (**g).clone(),
        Formula::Atom(a, op, b) => match canonicalize(a, op.negate(), b) {
            Some(Canon::Atom(c)) => c.to_formula(),
            _ => Formula::Not(Box::new(f.clone())),
        },
        g => Formula::Not(Box::new(g.clone())),
    }
}

fn simplify_junction(parts: impl Iterator<Item = Formula>, conj: bool) -> Formula {
    let (unit, zero) = if conj { (Formula::True, Formula::False) } else { (Formula::False, Formula::True) };
    let mut out: Vec<Formula> = Vec::new();
    for p in parts {
        let flat: Vec<Formula> = match p {
            Formula::And(gs) if conj => gs,
            Formula::Or(gs) if !conj => gs,
            g => vec![g],
        };
        for g in flat {
            if g == unit {
                continue;
            }
            if g == zero {
                return zero;
            }
            if !out.contains(&g) {
                out.push(g);
            }
        }
    }
    for g in &out {
        if g.is_literal() && out.contains(&complement_of(g)) {
            return zero;
        }
    }
    if conj {
        match merge_bounds(out) {
            Some(merged) => out = merged,
            None => return Formula::False,
        }
    }
    match out.len() {
        0 => unit,
        1 => out.pop().unwrap(),
        _ => {
            if conj {
                Formula::And(out)
            } else {
                Formula::Or(out)
            }
        }
    }
}

/// Within a conjunction, keep only the tightest bounds per linear form.
/// Returns `None` when the bounds are contradictory.
fn merge_bounds(parts: Vec<Formula>) -> Option<Vec<Formula>> {
    #[derive(Default)]
    struct Bounds {
        lower: Option<(Rational, bool)>, // (value, strict)
        upper: Option<(Rational, bool)>,
        eq: Option<Rational>,
    }
    let mut bounds: BTreeMap<LinExpr, Bounds> = BTreeMap::new();
    let mut first_pos: BTreeMap<LinExpr, usize> = BTreeMap::new();
    let mut out: Vec<Option<Formula>> = Vec::new();
    for p in parts {
        let canon = match &p {
            Formula::Atom(a, op, b) if *op != RelOp::Ne => match canonicalize(a, *op, b) {
                Some(Canon::Atom(c)) => Some(c),
                _ => None,
            },
            _ => None,
        };
        match canon {
            None => out.push(Some(p)),
            Some(c) => {
                let b = bounds.entry(c.lin.clone()).or_default();
                first_pos.entry(c.lin.clone()).or_insert_with(|| {
                    out.push(None);
                    out.len() - 1
                });
                match c.op {
                    RelOp::Eq => {
                        if let Some(e) = &b.eq {
                            if *e != c.rhs {
                                return None;
                            }
                        }
                        b.eq = Some(c.rhs);
                    }
                    RelOp::Le | RelOp::Lt => {
                        let strict = c.op == RelOp::Lt;
                        let tighter = match &b.upper {
                            None => true,
                            Some((v, s)) => c.rhs < *v || (c.rhs == *v && strict && !s),
                        };
                        if tighter {
                            b.upper = Some((c.rhs, strict));
                        }
                    }
                    RelOp::Ge | RelOp::Gt => {
                        let strict = c.op == RelOp::Gt;
                        let tighter = match &b.lower {
                            None => true,
                            Some((v, s)) => c.rhs > *v || (c.rhs == *v && strict && !s),
                        };
                        if tighter {
                            b.lower = Some((c.rhs, strict));
                        }
                    }
                    RelOp::Ne => unreachable!(),
                }
            }
        }
    }
    for (lin, pos) in first_pos {
        let b = &bounds[&lin];
        let mut lits = Vec::new();
        if let Some(e) = &b.eq {
            if let Some((l, s)) = &b.lower {
                if e < l || (e == l && *s) {
                    return None;
                }
            }
            if let Some((u, s)) = &b.upper {
                if e > u || (e == u && *s) {
                    return None;
                }
            }
            lits.push(CanonAtom { lin: lin.clone(), op: RelOp::Eq, rhs: e.clone() }.to_formula());
        } else {
            if let (Some((l, ls)), Some((u, us))) = (&b.lower, &b.upper) {
                if l > u || (l == u && (*ls || *us)) {
                    return None;
                }
                if l == u {
                    lits.push(CanonAtom { lin: lin.clone(), op: RelOp::Eq, rhs: l.clone() }.to_formula());
                }
            }
            if lits.is_empty() {
                if let Some((l, s)) = &b.lower {
                    let op = if *s { RelOp::Gt } else { RelOp::Ge };
                    lits.push(CanonAtom { lin: lin.clone(), op, rhs: l.clone() }.to_formula());
                }
                if let Some((u, s)) = &b.upper {
                    let op = if *s { RelOp::Lt } else { RelOp::Le };
                    lits.push(CanonAtom { lin: lin.clone(), op, rhs: u.clone() }.to_formula());
                }
            }
        }
        out[pos] = Some(if lits.len() == 1 { lits.pop().unwrap() } else { Formula::And(lits) });
    }
    let mut flat = Vec::new();
    for f in out.into_iter().flatten() {
        match f {
            Formula::And(gs) => flat.extend(gs),
            g => flat.push(g),
        }
    }
    Some(flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::eval::eval;
    use crate::logic::types::{rat, Model, Value};

    #[test]
    fn substitute_shift() {
        let x = Var::real("x");
        let y = Var::real("y");
        let f = Formula::le(Term::var(&x), Term::var(&y));
        let mut s = Subst::new();
        s.insert(y.clone(), Assign::Num(Term::sum([Term::var(&x), Term::int(1)])));
        let g = substitute(&f, &s).unwrap();
        assert_eq!(g, Formula::le(Term::var(&x), Term::sum([Term::var(&x), Term::int(1)])));
        assert_eq!(simplify(&g), Formula::True);
    }

    #[test]
    fn substitute_rejects_sort_mismatch() {
        let b = Var::bool("b");
        let mut s = Subst::new();
        s.insert(b.clone(), Assign::Num(Term::int(1)));
        assert!(substitute(&Formula::var(&b), &s).is_err());
    }

    #[test]
    fn nnf_pushes_negation() {
        let x = Var::real("x");
        let y = Var::real("y");
        let f = Formula::not(Formula::and([
            Formula::lt(Term::var(&x), Term::int(1)),
            Formula::eq(Term::var(&y), Term::int(0)),
        ]));
        let g = nnf(&f);
        assert_eq!(
            g,
            Formula::Or(vec![
                Formula::ge(Term::var(&x), Term::int(1)),
                Formula::lt(Term::var(&y), Term::int(0)),
                Formula::gt(Term::var(&y), Term::int(0)),
            ])
        );
        let a = Var::bool("a");
        let b = Var::bool("b");
        let h = nnf(&Formula::not(Formula::implies(Formula::var(&a), Formula::var(&b))));
        assert_eq!(h, Formula::And(vec![Formula::var(&a), Formula::not(Formula::var(&b))]));
    }

    #[test]
    fn simplify_examples() {
        let x = Var::real("x");
        let f = Formula::and([Formula::le(Term::var(&x), Term::int(5)), Formula::True]);
        assert_eq!(simplify(&f), Formula::le(Term::var(&x), Term::int(5)));
        assert_eq!(simplify(&Formula::lt(Term::int(1), Term::int(2))), Formula::True);
        let g = Formula::and([
            Formula::le(Term::var(&x), Term::int(5)),
            Formula::gt(Term::var(&x), Term::int(7)),
        ]);
        assert_eq!(simplify(&g), Formula::False);
    }

    #[test]
    fn integer_tightening() {
        let n = Var::int("n");
        let f = Formula::lt(Term::scale(rat(2), Term::var(&n)), Term::int(5));
        // 2n < 5  <=>  n <= 2
        assert_eq!(simplify(&f), Formula::le(Term::var(&n), Term::int(2)));
        let g = Formula::eq(Term::scale(rat(2), Term::var(&n)), Term::int(5));
        assert_eq!(simplify(&g), Formula::False);
        for v in -5..6 {
            let m = Model::new().with(&n, Value::Num(rat(v)));
            assert_eq!(eval(&f, &m).unwrap(), eval(&simplify(&f), &m).unwrap());
        }
    }
}
