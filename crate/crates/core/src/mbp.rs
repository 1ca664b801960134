//! Model-based projection for linear integer/real arithmetic.
//!
//! Given `m ⊨ T(x, y)`, [`project`] returns a `y`-free guard `P(x)` with
//! `m ⊨ P` and `P ⇒ T[y ↦ w(x)]` for explicit witness terms `w`. Reals are
//! handled by ε-free virtual substitution (midpoints and unit offsets for
//! strict bounds), integers by bound and divisibility resolution with the
//! residue class read from `m`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use crate::logic::{
    eval, eval_term, nnf, simplify, Assign, Formula, LinExpr, LogicError, Model, Rational,
    RelOp, Sort, Term, Value, Var,
};
use crate::smt::{SatResult, SmtError, Solver};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MbpError {
    #[error("non-linear input: {0}")]
    NonLinear(String),
    #[error("the model does not satisfy the formula")]
    ModelDoesNotSatisfy,
    #[error("solver gave up: {0}")]
    Unknown(String),
    #[error("projection did not converge after {0} rounds")]
    TooManyRounds(usize),
    #[error(transparent)]
    Smt(#[from] SmtError),
}

impl From<LogicError> for MbpError {
    fn from(e: LogicError) -> Self {
        match e {
            LogicError::NonLinear(s) => MbpError::NonLinear(s),
            other => MbpError::Smt(SmtError::Logic(other)),
        }
    }
}

/// A `y`-free guard together with witness terms for the projected variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub guard: Formula,
    pub witnesses: BTreeMap<Var, Assign>,
}

#[derive(Clone, Debug)]
enum Lit {
    /// `e op 0` with `op` one of `<, <=, =, >=, >`.
    Cmp(LinExpr, RelOp),
    /// `k | e` (or its negation when `holds` is false).
    Div { k: BigInt, e: LinExpr, holds: bool },
    Other(Formula),
}

impl Lit {
    fn mentions(&self, y: &Var) -> bool {
        match self {
            Lit::Cmp(e, _) | Lit::Div { e, .. } => e.mentions(y),
            Lit::Other(f) => f.free_vars().contains(y),
        }
    }

    fn substitute(&self, y: &Var, w: &LinExpr) -> Lit {
        match self {
            Lit::Cmp(e, op) => Lit::Cmp(e.substitute(y, w), *op),
            Lit::Div { k, e, holds } => Lit::Div { k: k.clone(), e: e.substitute(y, w), holds: *holds },
            Lit::Other(f) => Lit::Other(f.clone()),
        }
    }

    fn to_formula(&self) -> Formula {
        match self {
            Lit::Cmp(e, op) => {
                let c = e.constant_part().clone();
                let lhs = e.clone() - LinExpr::constant(c.clone());
                Formula::Atom(lhs.to_term(), *op, Term::Const(-c))
            }
            Lit::Div { k, e, holds } => {
                let d = Formula::Divides(k.clone(), e.to_term());
                if *holds {
                    d
                } else {
                    Formula::not(d)
                }
            }
            Lit::Other(f) => f.clone(),
        }
    }
}

fn value_of(e: &LinExpr, m: &Model) -> Result<Rational, MbpError> {
    e.eval_with(|v| m.num(v).cloned())
        .ok_or_else(|| MbpError::Smt(SmtError::Logic(LogicError::UnboundVariable(format!("{e}")))))
}

/// Collect literals, true under `m`, whose conjunction implies `f` (in NNF).
fn implicant(f: &Formula, m: &Model, out: &mut Vec<Formula>) -> Result<(), MbpError> {
    match f {
        Formula::True => Ok(()),
        Formula::False => Err(MbpError::ModelDoesNotSatisfy),
        Formula::And(fs) => fs.iter().try_for_each(|g| implicant(g, m, out)),
        Formula::Or(fs) => {
            for g in fs {
                if eval(g, m)? {
                    return implicant(g, m, out);
                }
            }
            Err(MbpError::ModelDoesNotSatisfy)
        }
        lit => {
            if !eval(lit, m)? {
                return Err(MbpError::ModelDoesNotSatisfy);
            }
            if !out.contains(lit) {
                out.push(lit.clone());
            }
            Ok(())
        }
    }
}

fn to_lit(f: &Formula) -> Result<Lit, MbpError> {
    Ok(match f {
        Formula::Atom(a, op, b) => {
            let e = a.to_linear()? - b.to_linear()?;
            Lit::Cmp(e, *op)
        }
        Formula::Divides(k, t) => Lit::Div { k: k.clone(), e: t.to_linear()?, holds: true },
        Formula::Not(g) => match &**g {
            Formula::Divides(k, t) => Lit::Div { k: k.clone(), e: t.to_linear()?, holds: false },
            _ => Lit::Other(f.clone()),
        },
        _ => Lit::Other(f.clone()),
    })
}

/// Project `ys` out of `t` around the model `m`.
pub fn project(t: &Formula, ys: &[Var], m: &Model) -> Result<Projection, MbpError> {
    let t = nnf(t);
    let mut cube = Vec::new();
    implicant(&t, m, &mut cube)?;

    let mut ordered: Vec<Var> = ys.to_vec();
    ordered.sort_by(|a, b| a.name().cmp(b.name()));
    ordered.dedup();

    let mut witnesses: BTreeMap<Var, Assign> = BTreeMap::new();
    let mut lits = Vec::new();
    for f in &cube {
        lits.push(to_lit(f)?);
    }

    // Booleans take their model value.
    for y in ordered.iter().filter(|y| y.sort() == Sort::Bool) {
        let v = match m.get(y) {
            Some(Value::Bool(b)) => *b,
            _ => false,
        };
        witnesses.insert(y.clone(), Assign::Bool(if v { Formula::True } else { Formula::False }));
        let pos = Formula::var(y);
        let neg = Formula::not(Formula::var(y));
        lits.retain(|l| !matches!(l, Lit::Other(f) if *f == pos || *f == neg));
        if lits.iter().any(|l| l.mentions(y)) {
            return Err(MbpError::NonLinear(format!("boolean {y} under a non-literal context")));
        }
    }

    // Integers first, then reals.
    let mut steps: Vec<(Var, LinExpr)> = Vec::new();
    for y in ordered.iter().filter(|y| y.sort() == Sort::Int) {
        let w = eliminate_int(y, &mut lits, m)?;
        steps.push((y.clone(), w));
    }
    for y in ordered.iter().filter(|y| y.sort() == Sort::Real) {
        let w = eliminate_real(y, &mut lits, m)?;
        steps.push((y.clone(), w));
    }

    // Witnesses may refer to variables eliminated later; resolve backwards.
    let mut resolved: Vec<(Var, LinExpr)> = Vec::new();
    for (y, w) in steps.into_iter().rev() {
        let mut w = w;
        for (z, wz) in &resolved {
            w = w.substitute(z, wz);
        }
        resolved.push((y, w));
    }
    for (y, w) in resolved {
        witnesses.insert(y, Assign::Num(w.to_term()));
    }

    let guard = simplify(&Formula::and(lits.iter().map(Lit::to_formula)));
    Ok(Projection { guard, witnesses })
}

/// Solve `e op 0` for `y`: returns `(op', bound)` with `y op' bound`.
fn isolate(e: &LinExpr, op: RelOp, y: &Var) -> (RelOp, LinExpr) {
    let c = e.coeff(y);
    let mut rest = e.clone();
    rest.take(y);
    let bound = rest.scaled(&(-Rational::one() / &c));
    let op = if c.is_negative() { op.flip() } else { op };
    (op, bound)
}

#[derive(Clone)]
struct Bound {
    term: LinExpr,
    strict: bool,
    value: Rational,
}

fn eliminate_real(y: &Var, lits: &mut Vec<Lit>, m: &Model) -> Result<LinExpr, MbpError> {
    let (with_y, mut rest): (Vec<Lit>, Vec<Lit>) = lits.drain(..).partition(|l| l.mentions(y));
    let mut eqs = Vec::new();
    let mut lowers: Vec<Bound> = Vec::new();
    let mut uppers: Vec<Bound> = Vec::new();
    for l in &with_y {
        let Lit::Cmp(e, op) = l else {
            return Err(MbpError::NonLinear(format!("real {y} inside {}", l.to_formula())));
        };
        let (op, term) = isolate(e, *op, y);
        let value = value_of(&term, m)?;
        match op {
            RelOp::Eq => eqs.push(term),
            RelOp::Lt => uppers.push(Bound { term, strict: true, value }),
            RelOp::Le => uppers.push(Bound { term, strict: false, value }),
            RelOp::Gt => lowers.push(Bound { term, strict: true, value }),
            RelOp::Ge => lowers.push(Bound { term, strict: false, value }),
            RelOp::Ne => return Err(MbpError::NonLinear("disequality survived normalization".into())),
        }
    }

    if let Some(w) = eqs.first().cloned() {
        for l in &with_y {
            let s = l.substitute(y, &w);
            rest.push(s);
        }
        *lits = rest;
        return Ok(w);
    }

    let tightest_lower = pick(&lowers, true);
    let tightest_upper = pick(&uppers, false);
    let w = match (tightest_lower, tightest_upper) {
        (Some(li), up) => {
            let l = lowers[li].clone();
            for (j, o) in lowers.iter().enumerate() {
                if j != li {
                    // l ≥ o, strictly when o is strict and l is not
                    let op = if o.strict && !l.strict { RelOp::Gt } else { RelOp::Ge };
                    rest.push(Lit::Cmp(l.term.clone() - o.term.clone(), op));
                }
            }
            if !l.strict {
                for u in &uppers {
                    let op = if u.strict { RelOp::Lt } else { RelOp::Le };
                    rest.push(Lit::Cmp(l.term.clone() - u.term.clone(), op));
                }
                l.term.clone()
            } else if let Some(ui) = up {
                let u = uppers[ui].clone();
                rest.push(Lit::Cmp(l.term.clone() - u.term.clone(), RelOp::Lt));
                for (k, o) in uppers.iter().enumerate() {
                    if k != ui {
                        rest.push(Lit::Cmp(u.term.clone() - o.term.clone(), RelOp::Le));
                    }
                }
                (l.term.clone() + u.term.clone()).scaled(&Rational::new(1.into(), 2.into()))
            } else {
                l.term.clone() + LinExpr::constant(Rational::one())
            }
        }
        (None, Some(ui)) => {
            let u = uppers[ui].clone();
            for (k, o) in uppers.iter().enumerate() {
                if k != ui {
                    let op = if o.strict && !u.strict { RelOp::Lt } else { RelOp::Le };
                    rest.push(Lit::Cmp(u.term.clone() - o.term.clone(), op));
                }
            }
            if u.strict {
                u.term.clone() - LinExpr::constant(Rational::one())
            } else {
                u.term.clone()
            }
        }
        (None, None) => LinExpr::zero(),
    };
    *lits = rest;
    Ok(w)
}

/// Index of the tightest bound under the model: greatest lower / least upper;
/// on equal values strict wins, then the smaller term.
fn pick(bounds: &[Bound], lower: bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, b) in bounds.iter().enumerate() {
        let better = match best {
            None => true,
            Some(j) => {
                let c = &bounds[j];
                let tighter = if lower { b.value > c.value } else { b.value < c.value };
                tighter
                    || (b.value == c.value && b.strict && !c.strict)
                    || (b.value == c.value && b.strict == c.strict && b.term < c.term)
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

/// Multiply by the denominator lcm so all coefficients are integers.
fn integral(e: &LinExpr) -> LinExpr {
    let l = e.denominator_lcm();
    e.clone().scaled(&Rational::from_integer(l))
}

fn eliminate_int(y: &Var, lits: &mut Vec<Lit>, m: &Model) -> Result<LinExpr, MbpError> {
    let (with_y, mut rest): (Vec<Lit>, Vec<Lit>) = lits.drain(..).partition(|l| l.mentions(y));
    let my = m
        .num(y)
        .cloned()
        .ok_or_else(|| MbpError::Smt(SmtError::Logic(LogicError::UnboundVariable(y.name().into()))))?;

    let pure = with_y.iter().all(|l| match l {
        Lit::Cmp(e, _) | Lit::Div { e, .. } => e.all_int_vars(),
        Lit::Other(_) => false,
    });
    if !pure {
        // Mixed integer/real constraint: fix the model value.
        let w = LinExpr::constant(my);
        rest.extend(with_y.iter().map(|l| l.substitute(y, &w)));
        *lits = rest;
        return Ok(w);
    }

    // Normal forms: `a·y + r ≤ 0`, `a·y + r = 0`, `k | a·y + r`.
    enum Shape {
        Le(LinExpr),
        Eq(LinExpr),
        Div(BigInt, LinExpr, bool),
    }
    let mut shapes = Vec::new();
    for l in &with_y {
        match l {
            Lit::Cmp(e, op) => {
                let e = integral(e);
                let one = LinExpr::constant(Rational::one());
                shapes.push(match op {
                    RelOp::Lt => Shape::Le(e + one),
                    RelOp::Le => Shape::Le(e),
                    RelOp::Ge => Shape::Le(-e),
                    RelOp::Gt => Shape::Le(-e + one),
                    RelOp::Eq => Shape::Eq(e),
                    RelOp::Ne => return Err(MbpError::NonLinear("disequality survived normalization".into())),
                });
            }
            Lit::Div { k, e, holds } => {
                let d = e.denominator_lcm();
                shapes.push(Shape::Div(k * &d, integral(e), *holds));
            }
            Lit::Other(_) => unreachable!(),
        }
    }

    if let Some(eq) = shapes.iter().find_map(|s| match s {
        Shape::Eq(e) => Some(e.clone()),
        _ => None,
    }) {
        // a·y + r = 0 with a > 0  ⟹  y = -r/a, provided a | r.
        let mut e = eq;
        if e.coeff(y).is_negative() {
            e = -e;
        }
        let a = e.coeff(y);
        let mut r = e.clone();
        r.take(y);
        let w = (-r.clone()).scaled(&(Rational::one() / &a));
        if !a.is_one() {
            rest.push(Lit::Div { k: a.numer().clone(), e: r, holds: true });
        }
        rest.extend(with_y.iter().map(|l| l.substitute(y, &w)));
        *lits = rest;
        return Ok(w);
    }

    // Scale every constraint so that y appears as z = L·y.
    let coeff_abs = |e: &LinExpr| e.coeff(y).numer().abs();
    let mut big_l = BigInt::one();
    for s in &shapes {
        match s {
            Shape::Le(e) | Shape::Div(_, e, _) => big_l = big_l.lcm(&coeff_abs(e)),
            Shape::Eq(_) => unreachable!(),
        }
    }
    let lr = Rational::from_integer(big_l.clone());
    let mut lowers: Vec<Bound> = Vec::new();
    let mut uppers: Vec<Bound> = Vec::new();
    // (modulus, rest-term, holds): constraint `k | z + rest`
    let mut divs: Vec<(BigInt, LinExpr, bool)> = Vec::new();
    if !big_l.is_one() {
        divs.push((big_l.clone(), LinExpr::zero(), true));
    }
    for s in &shapes {
        match s {
            Shape::Le(e) => {
                let a = e.coeff(y);
                let mut r = e.clone();
                r.take(y);
                let factor = &lr / a.abs();
                let r = r.scaled(&factor);
                if a.is_positive() {
                    // z ≤ -r
                    let term = -r;
                    let value = value_of(&term, m)?;
                    uppers.push(Bound { term, strict: false, value });
                } else {
                    // z ≥ r
                    let value = value_of(&r, m)?;
                    lowers.push(Bound { term: r, strict: false, value });
                }
            }
            Shape::Div(k, e, holds) => {
                let mut e = e.clone();
                if e.coeff(y).is_negative() {
                    e = -e;
                }
                let a = e.coeff(y);
                let mut r = e.clone();
                r.take(y);
                let factor = &lr / &a;
                divs.push(((k * factor.numer()), r.scaled(&factor), *holds));
            }
            Shape::Eq(_) => unreachable!(),
        }
    }
    let modulus = divs.iter().fold(BigInt::one(), |acc, (k, _, _)| acc.lcm(k));
    let dr = Rational::from_integer(modulus.clone());
    let mz = &my * &lr;
    let floor_mod = |a: &Rational| -> Rational {
        // a is integral
        Rational::from_integer(a.numer().mod_floor(&modulus))
    };

    let z_w = if let Some(li) = pick(&lowers, true) {
        let l = lowers[li].clone();
        let delta = floor_mod(&(&mz - &l.value));
        let zw = l.term.clone() + LinExpr::constant(delta);
        for (j, o) in lowers.iter().enumerate() {
            if j != li {
                rest.push(Lit::Cmp(l.term.clone() - o.term.clone(), RelOp::Ge));
            }
        }
        for u in &uppers {
            rest.push(Lit::Cmp(zw.clone() - u.term.clone(), RelOp::Le));
        }
        zw
    } else if let Some(ui) = pick(&uppers, false) {
        let u = uppers[ui].clone();
        let delta = floor_mod(&(&u.value - &mz));
        let zw = u.term.clone() - LinExpr::constant(delta);
        for (k, o) in uppers.iter().enumerate() {
            if k != ui {
                rest.push(Lit::Cmp(u.term.clone() - o.term.clone(), RelOp::Le));
            }
        }
        zw
    } else {
        LinExpr::constant(floor_mod(&mz))
    };
    let _ = dr;
    for (k, r, holds) in divs {
        rest.push(Lit::Div { k, e: z_w.clone() + r, holds });
    }
    *lits = rest;
    Ok(z_w.scaled(&(Rational::one() / lr)))
}

/// `∃ys. t` as a quantifier-free formula, by covering the models of `t` with
/// projection guards. Exponential in the worst case; meant for audits,
/// tests and the finite-state oracle.
pub fn eliminate_all(solver: &mut Solver, t: &Formula, ys: &[Var]) -> Result<Formula, MbpError> {
    const MAX_ROUNDS: usize = 10_000;
    let scope: Vec<Var> = t.free_vars().into_iter().chain(ys.iter().cloned()).collect();
    let mut guards: Vec<Formula> = Vec::new();
    for _ in 0..MAX_ROUNDS {
        let blocked = Formula::and([t.clone(), Formula::not(Formula::or(guards.clone()))]);
        match solver.check_sat(&blocked, &scope)? {
            SatResult::Unsat => return Ok(simplify(&Formula::or(guards))),
            SatResult::Unknown(r) => return Err(MbpError::Unknown(r)),
            SatResult::Sat(m) => guards.push(project(t, ys, &m)?.guard),
        }
    }
    Err(MbpError::TooManyRounds(MAX_ROUNDS))
}

/// Evaluate a projection's witnesses under `m`, extending it.
pub fn apply_witnesses(p: &Projection, m: &Model) -> Result<Model, LogicError> {
    let mut out = m.clone();
    for (y, w) in &p.witnesses {
        let v = match w {
            Assign::Num(t) => Value::Num(eval_term(t, m)?),
            Assign::Bool(f) => Value::Bool(eval(f, m)?),
        };
        if !out.try_insert(y.clone(), v) {
            return Err(LogicError::SortMismatch(format!("witness for {y} is not integral")));
        }
    }
    Ok(out)
}
