//! Reference stream semantics, for both raw and elaborated programs.
//!
//! Evaluation is strict: every subexpression and every node instance is
//! computed at every instant. `pre` at the first instant yields nil, and nil
//! propagates through every operator.

use std::collections::BTreeMap;

use super::ast::{BinOp, Expr, ExprKind, Node, Program, Statement, UnOp};
use super::elaborate::{euclid, CExpr, CheckedContract};
use crate::logic::{Rational, Value};

pub type Stream = Option<Value>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterpError {
    #[error("causality loop through `{0}`")]
    Cycle(String),
    #[error("unknown stream `{0}`")]
    Unknown(String),
}

/// Values of one instant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instant {
    pub values: BTreeMap<String, Stream>,
    /// Conjunction of all assertions (including inlined ones).
    pub asserts: Stream,
}

fn num(v: &Stream) -> Option<&Rational> {
    match v {
        Some(Value::Num(r)) => Some(r),
        _ => None,
    }
}

fn boolean(v: &Stream) -> Option<bool> {
    match v {
        Some(Value::Bool(b)) => Some(*b),
        _ => None,
    }
}

fn apply_unary(op: UnOp, a: &Stream) -> Stream {
    match op {
        UnOp::Neg => num(a).map(|r| Value::Num(-r)),
        UnOp::Not => boolean(a).map(|b| Value::Bool(!b)),
    }
}

fn apply_binary(op: BinOp, a: &Stream, b: &Stream) -> Stream {
    use BinOp::*;
    let (a, b) = (a.as_ref()?, b.as_ref()?);
    Some(match (op, a, b) {
        (And, Value::Bool(x), Value::Bool(y)) => Value::Bool(*x && *y),
        (Or, Value::Bool(x), Value::Bool(y)) => Value::Bool(*x || *y),
        (Xor, Value::Bool(x), Value::Bool(y)) => Value::Bool(x != y),
        (Implies, Value::Bool(x), Value::Bool(y)) => Value::Bool(!*x || *y),
        (Eq, x, y) => Value::Bool(x == y),
        (Ne, x, y) => Value::Bool(x != y),
        (op, Value::Num(x), Value::Num(y)) => match op {
            Lt => Value::Bool(x < y),
            Le => Value::Bool(x <= y),
            Gt => Value::Bool(x > y),
            Ge => Value::Bool(x >= y),
            Add => Value::Num(x + y),
            Sub => Value::Num(x - y),
            Mul => Value::Num(x * y),
            Div => Value::Num(x / y),
            IntDiv => Value::Num(euclid(x, y).0),
            Mod => Value::Num(euclid(x, y).1),
            _ => return None,
        },
        _ => return None,
    })
}

fn ite(c: &Stream, t: Stream, e: Stream) -> Stream {
    match boolean(c)? {
        true => t,
        false => e,
    }
}

fn conj(acc: Stream, v: &Stream) -> Stream {
    match (acc, boolean(v)) {
        (Some(Value::Bool(a)), Some(b)) => Some(Value::Bool(a && b)),
        _ => None,
    }
}

// ---------------------------------------------------------------- elaborated

/// Interpreter over an elaborated contract.
pub struct CheckedInterp<'a> {
    c: &'a CheckedContract,
    history: Vec<BTreeMap<String, Stream>>,
}

impl<'a> CheckedInterp<'a> {
    pub fn new(c: &'a CheckedContract) -> Self {
        CheckedInterp { c, history: Vec::new() }
    }

    /// `free` supplies inputs and any controller stream without an equation.
    pub fn step(&mut self, free: &BTreeMap<String, Value>) -> Result<Instant, InterpError> {
        let t = self.history.len();
        let mut cur: BTreeMap<String, Stream> = BTreeMap::new();
        for (n, _) in self.c.inputs.iter().chain(&self.c.state) {
            if self.c.equation(n).is_none() {
                cur.insert(n.clone(), free.get(n).cloned());
            }
        }
        let mut busy = Vec::new();
        for (n, _) in &self.c.equations {
            self.force(n, t, &mut cur, &mut busy)?;
        }
        let mut asserts = Some(Value::Bool(true));
        for a in &self.c.asserts {
            let v = self.eval(a, t, &mut cur, &mut busy)?;
            asserts = conj(asserts, &v);
        }
        self.history.push(cur.clone());
        Ok(Instant { values: cur, asserts })
    }

    fn force(
        &self,
        name: &str,
        t: usize,
        cur: &mut BTreeMap<String, Stream>,
        busy: &mut Vec<String>,
    ) -> Result<Stream, InterpError> {
        if let Some(v) = cur.get(name) {
            return Ok(v.clone());
        }
        if busy.iter().any(|b| b == name) {
            return Err(InterpError::Cycle(name.to_string()));
        }
        let e = self.c.equation(name).ok_or_else(|| InterpError::Unknown(name.to_string()))?;
        busy.push(name.to_string());
        let v = self.eval(e, t, cur, busy)?;
        busy.pop();
        cur.insert(name.to_string(), v.clone());
        Ok(v)
    }

    fn eval(
        &self,
        e: &CExpr,
        t: usize,
        cur: &mut BTreeMap<String, Stream>,
        busy: &mut Vec<String>,
    ) -> Result<Stream, InterpError> {
        let now = t == self.history.len();
        Ok(match e {
            CExpr::Bool(b) => Some(Value::Bool(*b)),
            CExpr::Num(r, _) => Some(Value::Num(r.clone())),
            CExpr::Var(n, _) => {
                if now {
                    self.force(n, t, cur, busy)?
                } else {
                    self.history[t].get(n).cloned().ok_or_else(|| InterpError::Unknown(n.clone()))?
                }
            }
            CExpr::Not(a) => apply_unary(UnOp::Not, &self.eval(a, t, cur, busy)?),
            CExpr::Neg(a) => apply_unary(UnOp::Neg, &self.eval(a, t, cur, busy)?),
            CExpr::Bin(op, a, b) => {
                let x = self.eval(a, t, cur, busy)?;
                let y = self.eval(b, t, cur, busy)?;
                apply_binary(*op, &x, &y)
            }
            CExpr::Ite(c, a, b) => {
                let c = self.eval(c, t, cur, busy)?;
                let x = self.eval(a, t, cur, busy)?;
                let y = self.eval(b, t, cur, busy)?;
                ite(&c, x, y)
            }
            CExpr::Pre(a) => {
                if t == 0 {
                    None
                } else {
                    self.eval(a, t - 1, cur, busy)?
                }
            }
            CExpr::Arrow(a, b) => {
                let x = self.eval(a, t, cur, busy)?;
                let y = self.eval(b, t, cur, busy)?;
                if t == 0 {
                    x
                } else {
                    y
                }
            }
        })
    }
}

// ----------------------------------------------------------------------- raw

struct Instance<'a> {
    node: &'a Node,
    history: Vec<BTreeMap<String, Stream>>,
    /// Call sites keyed by expression address.
    calls: BTreeMap<usize, Instance<'a>>,
}

/// Interpreter over the parsed program, with one instance per call site.
pub struct RawInterp<'a> {
    program: &'a Program,
    consts: BTreeMap<String, Stream>,
    root: Instance<'a>,
}

struct Frame<'a> {
    cur: BTreeMap<String, Stream>,
    busy: Vec<String>,
    called: BTreeMap<usize, Stream>,
    asserts: Stream,
    _node: &'a Node,
}

impl<'a> RawInterp<'a> {
    pub fn new(program: &'a Program, node: &str) -> Option<Self> {
        let node = program.node(node)?;
        let mut interp = RawInterp {
            program,
            consts: BTreeMap::new(),
            root: Instance { node, history: Vec::new(), calls: BTreeMap::new() },
        };
        for c in program.consts() {
            let v = const_value(&c.value, &interp.consts);
            interp.consts.insert(c.name.clone(), v);
        }
        Some(interp)
    }

    /// `free` supplies every parameter of the node.
    pub fn step(&mut self, free: &BTreeMap<String, Value>) -> Result<Instant, InterpError> {
        let params: BTreeMap<String, Stream> =
            self.root.node.params.iter().map(|d| (d.name.clone(), free.get(&d.name).cloned())).collect();
        let (program, consts) = (self.program, &self.consts);
        let (values, asserts) = step_instance(program, consts, &mut self.root, params)?;
        Ok(Instant { values, asserts })
    }
}

fn const_value(e: &Expr, consts: &BTreeMap<String, Stream>) -> Stream {
    match &e.kind {
        ExprKind::Bool(b) => Some(Value::Bool(*b)),
        ExprKind::Int(n) => Some(Value::Num(Rational::from_integer(n.clone()))),
        ExprKind::Real(r) => Some(Value::Num(r.clone())),
        ExprKind::Ident(n) => consts.get(n).cloned().flatten(),
        ExprKind::Unary(op, a) => apply_unary(*op, &const_value(a, consts)),
        ExprKind::Binary(op, a, b) => apply_binary(*op, &const_value(a, consts), &const_value(b, consts)),
        ExprKind::If(c, a, b) => ite(&const_value(c, consts), const_value(a, consts), const_value(b, consts)),
        _ => None,
    }
}

fn step_instance<'a>(
    program: &'a Program,
    consts: &BTreeMap<String, Stream>,
    inst: &mut Instance<'a>,
    params: BTreeMap<String, Stream>,
) -> Result<(BTreeMap<String, Stream>, Stream), InterpError> {
    let t = inst.history.len();
    let node = inst.node;
    let mut f = Frame { cur: params, busy: Vec::new(), called: BTreeMap::new(), asserts: Some(Value::Bool(true)), _node: node };
    for (lhs, _, _) in node.equations() {
        force_raw(program, consts, inst, lhs, t, &mut f)?;
    }
    for a in node.asserts() {
        let v = eval_raw(program, consts, inst, a, t, &mut f)?;
        f.asserts = conj(f.asserts.take(), &v);
    }
    // Instances under `pre` still advance every instant.
    let mut pending = Vec::new();
    for s in &node.body {
        match s {
            Statement::Equation { rhs: e, .. } | Statement::Assert(e, _) => calls_under_pre(e, false, &mut pending),
            Statement::Directive(_) => {}
        }
    }
    for e in pending {
        eval_raw(program, consts, inst, e, t, &mut f)?;
    }
    inst.history.push(f.cur.clone());
    Ok((f.cur, f.asserts))
}

fn calls_under_pre<'a>(e: &'a Expr, under: bool, out: &mut Vec<&'a Expr>) {
    match &e.kind {
        ExprKind::Bool(_) | ExprKind::Int(_) | ExprKind::Real(_) | ExprKind::Ident(_) => {}
        ExprKind::Unary(_, a) => calls_under_pre(a, under, out),
        ExprKind::Pre(a) => calls_under_pre(a, true, out),
        ExprKind::Binary(_, a, b) | ExprKind::Arrow(a, b) => {
            calls_under_pre(a, under, out);
            calls_under_pre(b, under, out);
        }
        ExprKind::If(c, a, b) => {
            calls_under_pre(c, under, out);
            calls_under_pre(a, under, out);
            calls_under_pre(b, under, out);
        }
        ExprKind::Call(_, args) => {
            if under {
                out.push(e);
            }
            for a in args {
                calls_under_pre(a, under, out);
            }
        }
    }
}

fn force_raw<'a>(
    program: &'a Program,
    consts: &BTreeMap<String, Stream>,
    inst: &mut Instance<'a>,
    name: &str,
    t: usize,
    f: &mut Frame<'a>,
) -> Result<Stream, InterpError> {
    if let Some(v) = f.cur.get(name) {
        return Ok(v.clone());
    }
    let node = inst.node;
    let Some((_, rhs, _)) = node.equations().find(|(l, _, _)| *l == name) else {
        return match consts.get(name) {
            Some(v) => Ok(v.clone()),
            None => Err(InterpError::Unknown(name.to_string())),
        };
    };
    if f.busy.iter().any(|b| b == name) {
        return Err(InterpError::Cycle(name.to_string()));
    }
    f.busy.push(name.to_string());
    let v = eval_raw(program, consts, inst, rhs, t, f)?;
    f.busy.pop();
    f.cur.insert(name.to_string(), v.clone());
    Ok(v)
}

fn eval_raw<'a>(
    program: &'a Program,
    consts: &BTreeMap<String, Stream>,
    inst: &mut Instance<'a>,
    e: &'a Expr,
    t: usize,
    f: &mut Frame<'a>,
) -> Result<Stream, InterpError> {
    let now = t == inst.history.len();
    Ok(match &e.kind {
        ExprKind::Bool(b) => Some(Value::Bool(*b)),
        ExprKind::Int(n) => Some(Value::Num(Rational::from_integer(n.clone()))),
        ExprKind::Real(r) => Some(Value::Num(r.clone())),
        ExprKind::Ident(n) => {
            if now {
                force_raw(program, consts, inst, n, t, f)?
            } else {
                match inst.history[t].get(n) {
                    Some(v) => v.clone(),
                    None => consts.get(n).cloned().ok_or_else(|| InterpError::Unknown(n.clone()))?,
                }
            }
        }
        ExprKind::Unary(op, a) => apply_unary(*op, &eval_raw(program, consts, inst, a, t, f)?),
        ExprKind::Binary(op, a, b) => {
            let x = eval_raw(program, consts, inst, a, t, f)?;
            let y = eval_raw(program, consts, inst, b, t, f)?;
            apply_binary(*op, &x, &y)
        }
        ExprKind::If(c, a, b) => {
            let c = eval_raw(program, consts, inst, c, t, f)?;
            let x = eval_raw(program, consts, inst, a, t, f)?;
            let y = eval_raw(program, consts, inst, b, t, f)?;
            ite(&c, x, y)
        }
        ExprKind::Pre(a) => {
            if t == 0 {
                None
            } else {
                eval_raw(program, consts, inst, a, t - 1, f)?
            }
        }
        ExprKind::Arrow(a, b) => {
            let x = eval_raw(program, consts, inst, a, t, f)?;
            let y = eval_raw(program, consts, inst, b, t, f)?;
            if t == 0 {
                x
            } else {
                y
            }
        }
        ExprKind::Call(name, args) => {
            let site = e as *const Expr as usize;
            let callee = program.node(name).ok_or_else(|| InterpError::Unknown(name.clone()))?;
            let out = &callee.returns[0].name;
            if !now {
                let child = inst.calls.get(&site).ok_or_else(|| InterpError::Unknown(name.clone()))?;
                return Ok(child.history[t].get(out).cloned().flatten());
            }
            if let Some(v) = f.called.get(&site) {
                return Ok(v.clone());
            }
            let mut params = BTreeMap::new();
            for (d, a) in callee.params.iter().zip(args) {
                params.insert(d.name.clone(), eval_raw(program, consts, inst, a, t, f)?);
            }
            let child = inst
                .calls
                .entry(site)
                .or_insert_with(|| Instance { node: callee, history: Vec::new(), calls: BTreeMap::new() });
            let (vals, asserts) = step_instance(program, consts, child, params)?;
            f.asserts = conj(f.asserts.take(), &asserts);
            let v = vals.get(out).cloned().flatten();
            f.called.insert(site, v.clone());
            v
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::rat;
    use crate::lustre::{elaborate, parse};

    #[test]
    fn counter_with_reset() {
        let p = parse("node n(r: bool) returns (c: int); let c = 0 -> if r then 0 else pre(c) + 1; tel;").unwrap();
        let checked = elaborate(&p).unwrap();
        let mut raw = RawInterp::new(&p, "n").unwrap();
        let mut el = CheckedInterp::new(&checked);
        let script = [false, false, true, false];
        let expect = [0, 1, 0, 1];
        for (r, want) in script.iter().zip(expect) {
            let free: BTreeMap<String, Value> = [("r".to_string(), Value::Bool(*r))].into();
            let a = raw.step(&free).unwrap();
            let b = el.step(&free).unwrap();
            assert_eq!(a.values["c"], Some(Value::Num(rat(want))));
            assert_eq!(a.values, b.values);
        }
    }

    #[test]
    fn pre_at_first_instant_is_nil() {
        let p = parse("node n(x: int) returns (y: int); let y = 0 -> pre(x); tel;").unwrap();
        let checked = elaborate(&p).unwrap();
        let mut el = CheckedInterp::new(&checked);
        let free: BTreeMap<String, Value> = [("x".to_string(), Value::Num(rat(4)))].into();
        assert_eq!(el.step(&free).unwrap().values["y"], Some(Value::Num(rat(0))));
        assert_eq!(el.step(&free).unwrap().values["y"], Some(Value::Num(rat(4))));
    }

    #[test]
    fn node_instances_keep_separate_memory() {
        let p = parse(
            "node acc(i: int) returns (s: int); let s = i -> pre(s) + i; tel;
             node main(a: int) returns (x, y: int); let x = acc(a); y = acc(2 * a); tel;",
        )
        .unwrap();
        let mut raw = RawInterp::new(&p, "main").unwrap();
        let free: BTreeMap<String, Value> = [("a".to_string(), Value::Num(rat(1)))].into();
        raw.step(&free).unwrap();
        let v = raw.step(&free).unwrap();
        assert_eq!(v.values["x"], Some(Value::Num(rat(2))));
        assert_eq!(v.values["y"], Some(Value::Num(rat(4))));
    }
}
