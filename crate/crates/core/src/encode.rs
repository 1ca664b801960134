//! Lowering of an elaborated contract to the transition system (A, G_I, G_T).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::logic::smtlib::{formula_to_smt, symbol};
use crate::logic::{
    canonical_atom, renaming, simplify, substitute, Assign, Canon, Formula, LinExpr, LogicError, Rational, RelOp, Sort, Subst, Value,
    Var,
};
use crate::lustre::ast::BinOp;
use crate::lustre::{CExpr, CheckedContract};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("non-linear term `{0}`")]
    NonLinearTerm(String),
    #[error("input `{0}` is defined by an equation")]
    InputDefinedByEquation(String),
    #[error("input `{input}` is read at the first instant in `{context}`; guard it with `->`")]
    InputAtInitialInstant { input: String, context: String },
    #[error("assertion reads `{0}` at the current instant; assumptions may only read inputs and `pre` of state")]
    StateInAssumption(String),
    #[error("unsupported use of pre: `{0}`")]
    UnsupportedPre(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// A symbolic transition system over state `s`, input `i` and next state `s'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    pub name: String,
    pub state: Vec<Var>,
    pub inputs: Vec<Var>,
    /// `next[k]` is the primed copy of `state[k]`.
    pub next: Vec<Var>,
    /// A(s, i)
    pub assumptions: Formula,
    /// G_I(s)
    pub init: Formula,
    /// G_T(s, i, s')
    pub trans: Formula,
    pub properties: Vec<Var>,
}

impl TransitionSystem {
    /// Build a system directly from formulas; `next` is derived by priming.
    pub fn new(
        name: impl Into<String>,
        state: Vec<Var>,
        inputs: Vec<Var>,
        assumptions: Formula,
        init: Formula,
        trans: Formula,
    ) -> Result<TransitionSystem, LogicError> {
        let next = state.iter().map(Var::primed).collect();
        let ts = TransitionSystem { name: name.into(), state, inputs, next, assumptions, init, trans, properties: Vec::new() };
        ts.check_scopes()?;
        Ok(ts)
    }

    pub fn check_scopes(&self) -> Result<(), LogicError> {
        let s: BTreeSet<&Var> = self.state.iter().collect();
        let si: BTreeSet<&Var> = s.iter().copied().chain(&self.inputs).collect();
        let sin: BTreeSet<&Var> = si.iter().copied().chain(&self.next).collect();
        if si.len() != self.state.len() + self.inputs.len() || sin.len() != si.len() + self.next.len() {
            return Err(LogicError::Parse("variable names collide across state, input and next".into()));
        }
        for (f, scope, what) in
            [(&self.assumptions, &si, "A"), (&self.init, &s, "G_I"), (&self.trans, &sin, "G_T")]
        {
            if let Some(v) = f.free_vars().iter().find(|v| !scope.contains(v)) {
                return Err(LogicError::UnboundVariable(format!("{v} in {what}")));
            }
        }
        Ok(())
    }

    /// `x ↦ x'` over the state variables.
    pub fn prime(&self) -> Subst {
        renaming(&self.state, &self.next)
    }

    /// `x' ↦ x`.
    pub fn unprime(&self) -> Subst {
        renaming(&self.next, &self.state)
    }

    /// `f[s ↦ s']`, for state formulas.
    pub fn primed(&self, f: &Formula) -> Formula {
        substitute(f, &self.prime()).expect("renaming preserves sorts")
    }

    pub fn state_and_inputs(&self) -> Vec<Var> {
        self.state.iter().chain(&self.inputs).cloned().collect()
    }

    pub fn all_vars(&self) -> Vec<Var> {
        self.state.iter().chain(&self.inputs).chain(&self.next).cloned().collect()
    }

    /// SMT-LIB 2 `define-fun` text for A, G_I and G_T.
    pub fn to_smtlib(&self) -> String {
        let params = |vs: &[&Var]| {
            vs.iter().map(|v| format!("({} {})", symbol(v.name()), v.sort().smt_name())).collect::<Vec<_>>().join(" ")
        };
        let s: Vec<&Var> = self.state.iter().collect();
        let si: Vec<&Var> = self.state.iter().chain(&self.inputs).collect();
        let sin: Vec<&Var> = si.iter().copied().chain(&self.next).collect();
        let mut out = String::new();
        let _ = writeln!(out, "; transition system for {}", self.name);
        let names = |vs: &[Var]| vs.iter().map(|v| v.name().to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "; state: {}", names(&self.state));
        let _ = writeln!(out, "; inputs: {}", names(&self.inputs));
        if !self.properties.is_empty() {
            let _ = writeln!(out, "; properties: {}", names(&self.properties));
        }
        let _ = writeln!(out, "(define-fun A ({}) Bool\n  {})", params(&si), formula_to_smt(&self.assumptions));
        let _ = writeln!(out, "(define-fun G_I ({}) Bool\n  {})", params(&s), formula_to_smt(&self.init));
        let _ = writeln!(out, "(define-fun G_T ({}) Bool\n  {})", params(&sin), formula_to_smt(&self.trans));
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Reading {
    /// First instant: left of `->`; inputs are not available.
    Init,
    /// A later instant: right of `->`; streams are next-state, `pre` is state.
    Step,
    /// An assertion at a later instant; only inputs and `pre` are allowed.
    Assume,
    /// Under `pre`.
    Past,
}

type Cases = Vec<(Formula, LinExpr)>;

struct Lower<'a> {
    c: &'a CheckedContract,
    vars: BTreeMap<String, Var>,
    context: String,
}

fn relop(op: BinOp) -> RelOp {
    match op {
        BinOp::Eq => RelOp::Eq,
        BinOp::Ne => RelOp::Ne,
        BinOp::Lt => RelOp::Lt,
        BinOp::Le => RelOp::Le,
        BinOp::Gt => RelOp::Gt,
        _ => RelOp::Ge,
    }
}

fn atom(a: LinExpr, op: RelOp, b: LinExpr) -> Formula {
    match canonical_atom(a - b, op) {
        Canon::Const(true) => Formula::True,
        Canon::Const(false) => Formula::False,
        Canon::Atom(c) => c.to_formula(),
    }
}

fn guard(a: &Formula, b: &Formula) -> Formula {
    Formula::and([a.clone(), b.clone()])
}

impl Lower<'_> {
    fn var(&self, name: &str, r: Reading) -> Result<Var, EncodeError> {
        let v = self.vars.get(name).ok_or_else(|| LogicError::UnboundVariable(name.to_string()))?;
        let input = self.c.is_input(name);
        match (r, input) {
            (Reading::Init, true) => {
                Err(EncodeError::InputAtInitialInstant { input: name.to_string(), context: self.context.clone() })
            }
            (Reading::Init | Reading::Past, false) => Ok(v.clone()),
            (Reading::Step | Reading::Assume, true) => Ok(v.clone()),
            (Reading::Step, false) => Ok(v.primed()),
            (Reading::Assume, false) => Err(EncodeError::StateInAssumption(name.to_string())),
            (Reading::Past, true) => Err(EncodeError::UnsupportedPre(format!("pre of input `{name}`"))),
        }
    }

    fn boolean(&self, e: &CExpr, r: Reading) -> Result<Formula, EncodeError> {
        Ok(match e {
            CExpr::Bool(b) => {
                if *b {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            CExpr::Var(n, _) => Formula::var(&self.var(n, r)?),
            CExpr::Not(a) => Formula::not(self.boolean(a, r)?),
            CExpr::Ite(c, a, b) => {
                let c = self.boolean(c, r)?;
                let a = self.boolean(a, r)?;
                let b = self.boolean(b, r)?;
                Formula::or([Formula::and([c.clone(), a]), Formula::and([Formula::not(c), b])])
            }
            CExpr::Pre(a) => self.boolean(a, self.pre(r, e)?)?,
            CExpr::Arrow(a, b) => self.boolean(self.arrow(r, a, b, e)?, r)?,
            CExpr::Bin(op, a, b) => match op {
                BinOp::And => Formula::and([self.boolean(a, r)?, self.boolean(b, r)?]),
                BinOp::Or => Formula::or([self.boolean(a, r)?, self.boolean(b, r)?]),
                BinOp::Implies => Formula::implies(self.boolean(a, r)?, self.boolean(b, r)?),
                BinOp::Xor => Formula::not(Formula::iff(self.boolean(a, r)?, self.boolean(b, r)?)),
                BinOp::Eq | BinOp::Ne if a.sort() == Sort::Bool => {
                    let f = Formula::iff(self.boolean(a, r)?, self.boolean(b, r)?);
                    if *op == BinOp::Eq {
                        f
                    } else {
                        Formula::not(f)
                    }
                }
                op if op.is_comparison() => {
                    let ca = self.numeric(a, r)?;
                    let cb = self.numeric(b, r)?;
                    let mut alts = Vec::new();
                    for (ga, ta) in &ca {
                        for (gb, tb) in &cb {
                            alts.push(Formula::and([ga.clone(), gb.clone(), atom(ta.clone(), relop(*op), tb.clone())]));
                        }
                    }
                    Formula::or(alts)
                }
                _ => return Err(LogicError::SortMismatch(format!("`{e}` is not boolean")).into()),
            },
            CExpr::Num(..) | CExpr::Neg(_) => {
                return Err(LogicError::SortMismatch(format!("`{e}` is not boolean")).into())
            }
        })
    }

    fn pre(&self, r: Reading, e: &CExpr) -> Result<Reading, EncodeError> {
        match r {
            Reading::Step | Reading::Assume => Ok(Reading::Past),
            Reading::Past => Err(EncodeError::UnsupportedPre(format!("nested pre in `{e}`"))),
            Reading::Init => Err(EncodeError::UnsupportedPre(format!("`{e}` at the first instant"))),
        }
    }

    fn arrow<'e>(&self, r: Reading, a: &'e CExpr, b: &'e CExpr, e: &CExpr) -> Result<&'e CExpr, EncodeError> {
        match r {
            Reading::Init => Ok(a),
            Reading::Step | Reading::Assume => Ok(b),
            Reading::Past => Err(EncodeError::UnsupportedPre(format!("`->` under pre in `{e}`"))),
        }
    }

    /// Guarded linear values; the guards partition the state space.
    fn numeric(&self, e: &CExpr, r: Reading) -> Result<Cases, EncodeError> {
        Ok(match e {
            CExpr::Num(k, _) => vec![(Formula::True, LinExpr::constant(k.clone()))],
            CExpr::Var(n, _) => vec![(Formula::True, LinExpr::var(&self.var(n, r)?))],
            CExpr::Neg(a) => self.numeric(a, r)?.into_iter().map(|(g, t)| (g, -t)).collect(),
            CExpr::Ite(c, a, b) => {
                let c = self.boolean(c, r)?;
                let nc = Formula::not(c.clone());
                let mut out = Vec::new();
                for (g, t) in self.numeric(a, r)? {
                    out.push((guard(&c, &g), t));
                }
                for (g, t) in self.numeric(b, r)? {
                    out.push((guard(&nc, &g), t));
                }
                out.retain(|(g, _)| *g != Formula::False);
                out
            }
            CExpr::Pre(a) => self.numeric(a, self.pre(r, e)?)?,
            CExpr::Arrow(a, b) => self.numeric(self.arrow(r, a, b, e)?, r)?,
            CExpr::Bin(op, a, b) => {
                let ca = self.numeric(a, r)?;
                let cb = self.numeric(b, r)?;
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul => {
                        let mut out = Vec::new();
                        for (ga, ta) in &ca {
                            for (gb, tb) in &cb {
                                let t = match op {
                                    BinOp::Add => ta.clone() + tb.clone(),
                                    BinOp::Sub => ta.clone() - tb.clone(),
                                    _ => {
                                        if ta.is_constant() {
                                            tb.clone().scaled(ta.constant_part())
                                        } else if tb.is_constant() {
                                            ta.clone().scaled(tb.constant_part())
                                        } else {
                                            return Err(EncodeError::NonLinearTerm(e.to_string()));
                                        }
                                    }
                                };
                                out.push((guard(ga, gb), t));
                            }
                        }
                        out
                    }
                    BinOp::Div => {
                        let k = self.constant(&cb, e)?;
                        let inv = Rational::one() / k;
                        ca.into_iter().map(|(g, t)| (g, t.scaled(&inv))).collect()
                    }
                    BinOp::IntDiv | BinOp::Mod => {
                        let k = self.constant(&cb, e)?;
                        let k = k.to_integer();
                        let m = k.abs();
                        let width = m.to_usize().unwrap_or(usize::MAX);
                        if width > 64 {
                            return Err(EncodeError::NonLinearTerm(format!("{e} (divisor too large to case-split)")));
                        }
                        let mut out = Vec::new();
                        for (g, t) in &ca {
                            for rem in 0..width {
                                let rem = Rational::from_integer(BigInt::from(rem));
                                let shifted = t.clone() - LinExpr::constant(rem.clone());
                                let g = guard(g, &Formula::Divides(m.clone(), shifted.to_term()));
                                let value = if *op == BinOp::Mod {
                                    LinExpr::constant(rem)
                                } else {
                                    shifted.scaled(&(Rational::one() / Rational::from_integer(k.clone())))
                                };
                                out.push((g, value));
                            }
                        }
                        out
                    }
                    _ => return Err(LogicError::SortMismatch(format!("`{e}` is not numeric")).into()),
                }
            }
            CExpr::Bool(_) | CExpr::Not(_) => {
                return Err(LogicError::SortMismatch(format!("`{e}` is not numeric")).into())
            }
        })
    }

    fn constant(&self, cases: &Cases, e: &CExpr) -> Result<Rational, EncodeError> {
        match cases.as_slice() {
            [(Formula::True, t)] if t.is_constant() && !t.constant_part().is_zero() => Ok(t.constant_part().clone()),
            _ => Err(EncodeError::NonLinearTerm(e.to_string())),
        }
    }

    /// `target = e` under reading `r`.
    fn define(&self, target: &Var, e: &CExpr, r: Reading) -> Result<Formula, EncodeError> {
        if target.sort() == Sort::Bool {
            return Ok(Formula::iff(Formula::var(target), self.boolean(e, r)?));
        }
        let cases = self.numeric(e, r)?;
        let x = LinExpr::var(target);
        Ok(Formula::or(cases.into_iter().map(|(g, t)| Formula::and([g, atom(x.clone(), RelOp::Eq, t)]))))
    }
}

pub fn encode(c: &CheckedContract) -> Result<TransitionSystem, EncodeError> {
    let mut vars = BTreeMap::new();
    for (n, s) in c.inputs.iter().chain(&c.state) {
        vars.insert(n.clone(), Var::new(n, *s));
    }
    let mut lower = Lower { c, vars, context: String::new() };
    let mut init = Vec::new();
    let mut trans = Vec::new();
    for (name, e) in &c.equations {
        if c.is_input(name) {
            return Err(EncodeError::InputDefinedByEquation(name.clone()));
        }
        lower.context = format!("{name} = {e}");
        let v = lower.vars[name].clone();
        init.push(lower.define(&v, e, Reading::Init)?);
        trans.push(lower.define(&v.primed(), e, Reading::Step)?);
    }
    let mut assumptions = Vec::new();
    for a in &c.asserts {
        lower.context = format!("assert {a}");
        assumptions.push(lower.boolean(a, Reading::Assume)?);
    }
    let mut properties = Vec::new();
    for p in &c.properties {
        let v = lower.vars[p].clone();
        init.push(Formula::var(&v));
        trans.push(Formula::var(&v.primed()));
        properties.push(v);
    }
    let state: Vec<Var> = c.state.iter().map(|(n, _)| lower.vars[n].clone()).collect();
    let inputs: Vec<Var> = c.inputs.iter().map(|(n, _)| lower.vars[n].clone()).collect();
    let mut ts = TransitionSystem::new(
        c.node.clone(),
        state,
        inputs,
        Formula::and(assumptions),
        Formula::and(init),
        Formula::and(trans),
    )?;
    ts.properties = properties;
    Ok(ts)
}

/// Per-variable finite domains for exhaustive exploration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteDomains {
    pub domains: BTreeMap<String, Vec<String>>,
    #[serde(skip)]
    pub values: BTreeMap<Var, Vec<Value>>,
}

impl FiniteDomains {
    pub fn of(&self, v: &Var) -> &[Value] {
        &self.values[v]
    }

    /// Number of points in the product of the given variables' domains,
    /// saturating.
    pub fn size(&self, vars: &[Var]) -> u128 {
        vars.iter().fold(1u128, |acc, v| acc.saturating_mul(self.values[v].len() as u128))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no finite domain for `{0}`")]
pub struct NotFinite(pub String);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Interval {
    lo: Option<BigInt>,
    hi: Option<BigInt>,
}

impl Interval {
    fn meet(&mut self, lo: Option<BigInt>, hi: Option<BigInt>) {
        if let Some(l) = lo {
            self.lo = Some(self.lo.take().map_or(l.clone(), |x| x.max(l)));
        }
        if let Some(h) = hi {
            self.hi = Some(self.hi.take().map_or(h.clone(), |x| x.min(h)));
        }
    }

    fn bounded(&self) -> Option<(BigInt, BigInt)> {
        Some((self.lo.clone()?, self.hi.clone()?))
    }
}

fn conjuncts(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::And(fs) => fs.iter().for_each(|g| conjuncts(g, out)),
        _ => out.push(f.clone()),
    }
}

/// Interval constraints on single integer variables among the top-level
/// conjuncts of `f`, after fixing the boolean literals among them.
fn intervals(f: &Formula) -> BTreeMap<Var, Interval> {
    let mut parts = Vec::new();
    conjuncts(f, &mut parts);
    let mut fixed = Subst::new();
    for p in &parts {
        match p {
            Formula::BoolVar(v) => {
                fixed.insert(v.clone(), Assign::Bool(Formula::True));
            }
            Formula::Not(g) => {
                if let Formula::BoolVar(v) = &**g {
                    fixed.insert(v.clone(), Assign::Bool(Formula::False));
                }
            }
            _ => {}
        }
    }
    if !fixed.is_empty() {
        // both readings are implied by f; keep the atoms of each
        let g = simplify(&substitute(f, &fixed).expect("boolean substitution"));
        conjuncts(&g, &mut parts);
    }
    let mut out: BTreeMap<Var, Interval> = BTreeMap::new();
    for p in parts {
        let Formula::Atom(l, op, r) = &p else { continue };
        let (Ok(l), Ok(r)) = (l.to_linear(), r.to_linear()) else { continue };
        let Canon::Atom(a) = canonical_atom(l - r, *op) else { continue };
        let mut terms = a.lin.terms();
        let (Some((v, k)), None) = (terms.next(), terms.next()) else { continue };
        if v.sort() != Sort::Int {
            continue;
        }
        // k·v op rhs with k = ±1 after integer canonicalization
        let bound = &a.rhs / k;
        let op = if k.is_negative() { a.op.flip() } else { a.op };
        let iv = out.entry(v.clone()).or_default();
        match op {
            RelOp::Le => iv.meet(None, Some(bound.floor().to_integer())),
            RelOp::Lt => iv.meet(None, Some((bound - Rational::one()).ceil().to_integer())),
            RelOp::Ge => iv.meet(Some(bound.ceil().to_integer()), None),
            RelOp::Gt => iv.meet(Some((bound + Rational::one()).floor().to_integer()), None),
            RelOp::Eq if bound.is_integer() => {
                let b = bound.to_integer();
                iv.meet(Some(b.clone()), Some(b));
            }
            _ => {}
        }
    }
    out
}

/// Largest integer domain enumerated.
pub const MAX_DOMAIN: u64 = 1 << 20;

/// Finite domains from syntactic interval constraints.
///
/// Inputs must be bounded by A. An integer state variable needs a bound from
/// G_I and one on its primed copy from G_T; the domain is their hull, so it
/// holds every initial state and every successor. States outside it can
/// then never matter for the verdict.
pub fn bounded_domains(ts: &TransitionSystem) -> Result<FiniteDomains, NotFinite> {
    let a = intervals(&ts.assumptions);
    let gi = intervals(&ts.init);
    let gt = intervals(&ts.trans);
    let dead = simplify(&ts.trans) == Formula::False;
    let mut values = BTreeMap::new();
    let mut domains = BTreeMap::new();
    let range = |v: &Var, lo: BigInt, hi: BigInt| -> Result<Vec<Value>, NotFinite> {
        if hi < lo {
            return Ok(Vec::new());
        }
        let width = (&hi - &lo).to_u64().filter(|w| *w < MAX_DOMAIN).ok_or_else(|| NotFinite(v.name().to_string()))?;
        Ok((0..=width).map(|d| Value::Num(Rational::from_integer(&lo + BigInt::from(d)))).collect())
    };
    for (k, v) in ts.state.iter().enumerate() {
        let dom = match v.sort() {
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Sort::Real => return Err(NotFinite(v.name().to_string())),
            Sort::Int => {
                let own = gi.get(v).and_then(Interval::bounded);
                let succ = gt.get(&ts.next[k]).and_then(Interval::bounded);
                let (lo, hi) = match (own, succ) {
                    (Some((l1, h1)), Some((l2, h2))) => (l1.min(l2), h1.max(h2)),
                    // no successors at all
                    (Some(b), None) if dead => b,
                    _ => return Err(NotFinite(v.name().to_string())),
                };
                range(v, lo, hi)?
            }
        };
        values.insert(v.clone(), dom);
    }
    for v in &ts.inputs {
        let dom = match v.sort() {
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Sort::Real => return Err(NotFinite(v.name().to_string())),
            Sort::Int => {
                let (lo, hi) =
                    a.get(v).and_then(Interval::bounded).ok_or_else(|| NotFinite(v.name().to_string()))?;
                range(v, lo, hi)?
            }
        };
        values.insert(v.clone(), dom);
    }
    for (v, d) in &values {
        domains.insert(v.name().to_string(), d.iter().map(|x| x.to_string()).collect());
    }
    Ok(FiniteDomains { domains, values })
}
