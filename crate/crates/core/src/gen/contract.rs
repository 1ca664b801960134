//! Random well-typed Lustre programs.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::logic::{ratio, Sort, Value};
use crate::lustre::ast::*;
use crate::lustre::Span;

#[derive(Clone, Debug)]
pub struct ProgramShape {
    /// Sorts drawn for streams; `Bool` is always available for conditions.
    pub sorts: Vec<Sort>,
    pub helpers: usize,
    pub depth: u32,
    /// Restrict to the shapes the transition-system encoder accepts: no
    /// calls, `pre` only of controller streams, arrows only at the top of an
    /// equation, no input in any first-instant reading, asserts over inputs
    /// and `pre` only.
    pub encodable: bool,
}

impl Default for ProgramShape {
    fn default() -> Self {
        ProgramShape { sorts: vec![Sort::Bool, Sort::Int, Sort::Real], helpers: 2, depth: 3, encodable: false }
    }
}

fn ex(kind: ExprKind) -> Expr {
    Expr::new(kind, Span::default())
}

fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    ex(ExprKind::Binary(op, Box::new(a), Box::new(b)))
}

struct Helper {
    name: String,
    params: Vec<Sort>,
    ret: Sort,
}

#[derive(Clone, Copy)]
struct Ctx {
    /// `pre` is reachable only after the first instant.
    pre_ok: bool,
    /// Inputs may be read.
    inputs: bool,
    /// Current-instant controller streams may be read.
    current: bool,
    arrows: bool,
}

struct Scope {
    params: Vec<(String, Sort)>,
    /// Streams that may be read at the current instant.
    earlier: Vec<(String, Sort)>,
    /// Streams that may be read under `pre`.
    memory: Vec<(String, Sort)>,
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    shape: ProgramShape,
    consts: Vec<(String, Sort)>,
    helpers: Vec<Helper>,
}

fn numeric(sorts: &[Sort]) -> Vec<Sort> {
    sorts.iter().copied().filter(|s| s.is_numeric()).collect()
}

impl<R: Rng> Gen<'_, R> {
    fn sort(&mut self) -> Sort {
        *self.shape.sorts.choose(self.rng).expect("nonempty sorts")
    }

    fn literal(&mut self, sort: Sort) -> Expr {
        match sort {
            Sort::Bool => ex(ExprKind::Bool(self.rng.gen_bool(0.5))),
            Sort::Int => ex(ExprKind::Int(BigInt::from(self.rng.gen_range(0..=6)))),
            Sort::Real => ex(ExprKind::Real(ratio(self.rng.gen_range(0..=12), 4))),
        }
    }

    fn nonzero(&mut self, sort: Sort) -> Expr {
        let k = self.rng.gen_range(1..=4);
        let lit = match sort {
            Sort::Real => ex(ExprKind::Real(ratio(k, 2))),
            _ => ex(ExprKind::Int(BigInt::from(k))),
        };
        if self.rng.gen_bool(0.3) {
            ex(ExprKind::Unary(UnOp::Neg, Box::new(lit)))
        } else {
            lit
        }
    }

    fn leaf(&mut self, sort: Sort, scope: &Scope, cx: Ctx) -> Expr {
        let mut pool: Vec<Expr> = Vec::new();
        let of = |v: &[(String, Sort)]| -> Vec<String> {
            v.iter().filter(|(_, s)| *s == sort).map(|(n, _)| n.clone()).collect()
        };
        for n in of(&self.consts) {
            pool.push(ex(ExprKind::Ident(n)));
        }
        if cx.inputs {
            for n in of(&scope.params) {
                pool.push(ex(ExprKind::Ident(n)));
            }
        }
        if cx.current {
            for n in of(&scope.earlier) {
                pool.push(ex(ExprKind::Ident(n)));
            }
        }
        if cx.pre_ok {
            for n in of(&scope.memory) {
                let var = ex(ExprKind::Ident(n));
                pool.push(ex(ExprKind::Pre(Box::new(var))));
            }
        }
        if pool.is_empty() || self.rng.gen_bool(0.2) {
            self.literal(sort)
        } else {
            let i = self.rng.gen_range(0..pool.len());
            pool.swap_remove(i)
        }
    }

    fn expr(&mut self, sort: Sort, depth: u32, scope: &Scope, cx: Ctx) -> Expr {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return self.leaf(sort, scope, cx);
        }
        let d = depth - 1;
        let nums = numeric(&self.shape.sorts);
        let callable: Vec<usize> = if self.shape.encodable {
            Vec::new()
        } else {
            (0..self.helpers.len()).filter(|&i| self.helpers[i].ret == sort).collect()
        };
        let choice = self.rng.gen_range(0..10);
        match choice {
            0 if cx.arrows => {
                let init = Ctx { pre_ok: false, ..cx };
                let a = self.expr(sort, d, scope, init);
                let b = self.expr(sort, d, scope, Ctx { pre_ok: true, ..cx });
                ex(ExprKind::Arrow(Box::new(a), Box::new(b)))
            }
            1 if cx.pre_ok && !self.shape.encodable => {
                let a = self.expr(sort, d, scope, Ctx { current: true, inputs: true, ..cx });
                ex(ExprKind::Pre(Box::new(a)))
            }
            2 if !callable.is_empty() => {
                let h = *callable.choose(self.rng).expect("nonempty");
                let params = self.helpers[h].params.clone();
                let name = self.helpers[h].name.clone();
                // inlined helper streams exist at the first instant too
                let at_init = Ctx { pre_ok: false, ..cx };
                let args = params.iter().map(|s| self.expr(*s, d, scope, at_init)).collect();
                ex(ExprKind::Call(name, args))
            }
            3 => {
                let c = self.expr(Sort::Bool, d, scope, cx);
                let a = self.expr(sort, d, scope, cx);
                let b = self.expr(sort, d, scope, cx);
                ex(ExprKind::If(Box::new(c), Box::new(a), Box::new(b)))
            }
            _ => match sort {
                Sort::Bool => match self.rng.gen_range(0..6) {
                    0 => ex(ExprKind::Unary(UnOp::Not, Box::new(self.expr(Sort::Bool, d, scope, cx)))),
                    1 | 2 if !nums.is_empty() => {
                        let s = *nums.choose(self.rng).expect("nonempty");
                        let op = *[BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge]
                            .choose(self.rng)
                            .expect("nonempty");
                        let a = self.expr(s, d, scope, cx);
                        let b = self.expr(s, d, scope, cx);
                        bin(op, a, b)
                    }
                    _ => {
                        let op = *[BinOp::And, BinOp::Or, BinOp::Xor, BinOp::Implies, BinOp::Eq]
                            .choose(self.rng)
                            .expect("nonempty");
                        let a = self.expr(Sort::Bool, d, scope, cx);
                        let b = self.expr(Sort::Bool, d, scope, cx);
                        bin(op, a, b)
                    }
                },
                _ => match self.rng.gen_range(0..6) {
                    0 => ex(ExprKind::Unary(UnOp::Neg, Box::new(self.expr(sort, d, scope, cx)))),
                    1 => {
                        let a = self.expr(sort, d, scope, cx);
                        let k = self.nonzero(sort);
                        if self.rng.gen_bool(0.5) {
                            bin(BinOp::Mul, k, a)
                        } else {
                            bin(BinOp::Mul, a, k)
                        }
                    }
                    2 => {
                        let a = self.expr(sort, d, scope, cx);
                        let k = self.nonzero(sort);
                        let op = match sort {
                            Sort::Real => BinOp::Div,
                            _ => *[BinOp::IntDiv, BinOp::Mod].choose(self.rng).expect("nonempty"),
                        };
                        bin(op, a, k)
                    }
                    _ => {
                        let op = if self.rng.gen_bool(0.5) { BinOp::Add } else { BinOp::Sub };
                        let a = self.expr(sort, d, scope, cx);
                        let b = self.expr(sort, d, scope, cx);
                        bin(op, a, b)
                    }
                },
            },
        }
    }

    fn decls(&mut self, prefix: &str, n: usize, first: Option<Sort>) -> Vec<Decl> {
        (0..n)
            .map(|i| {
                let sort = match (i, first) {
                    (0, Some(s)) => s,
                    _ => self.sort(),
                };
                Decl { name: format!("{prefix}{i}"), sort, span: Span::default() }
            })
            .collect()
    }

    fn node(&mut self, name: String, params: Vec<Decl>, returns: Vec<Decl>, locals: Vec<Decl>, main: bool) -> Node {
        let pairs = |ds: &[Decl]| ds.iter().map(|d| (d.name.clone(), d.sort)).collect::<Vec<_>>();
        let defined: Vec<Decl> = returns.iter().chain(&locals).cloned().collect();
        let mut scope = Scope { params: pairs(&params), earlier: Vec::new(), memory: pairs(&defined) };
        if !self.shape.encodable {
            scope.memory.extend(pairs(&params));
        }
        let depth = self.shape.depth;
        let mut body = Vec::new();
        for d in &defined {
            let rhs = if self.shape.encodable {
                let init = Ctx { pre_ok: false, inputs: false, current: true, arrows: false };
                if self.rng.gen_bool(0.8) {
                    let a = self.expr(d.sort, depth - 1, &scope, init);
                    let b = self.expr(d.sort, depth, &scope, Ctx { pre_ok: true, inputs: true, ..init });
                    ex(ExprKind::Arrow(Box::new(a), Box::new(b)))
                } else {
                    self.expr(d.sort, depth, &scope, init)
                }
            } else {
                let cx = Ctx { pre_ok: false, inputs: true, current: true, arrows: true };
                self.expr(d.sort, depth, &scope, cx)
            };
            body.push(Statement::Equation { lhs: d.name.clone(), rhs, span: Span::default() });
            scope.earlier.push((d.name.clone(), d.sort));
        }
        let asserts = if main { self.rng.gen_range(0..=2) } else { self.rng.gen_range(0..=1) };
        for _ in 0..asserts {
            let e = if self.shape.encodable {
                let cx = Ctx { pre_ok: true, inputs: true, current: false, arrows: false };
                let e = self.expr(Sort::Bool, 2, &scope, cx);
                ex(ExprKind::Arrow(Box::new(ex(ExprKind::Bool(true))), Box::new(e)))
            } else {
                let cx = Ctx { pre_ok: false, inputs: true, current: true, arrows: true };
                self.expr(Sort::Bool, 2, &scope, cx)
            };
            body.push(Statement::Assert(e, Span::default()));
        }
        body.shuffle(self.rng);
        Node { name, params, returns, locals, body, span: Span::default() }
    }
}

/// A random program whose last node is the synthesis node.
pub fn program(rng: &mut impl Rng, shape: &ProgramShape) -> Program {
    let mut g = Gen { rng, shape: shape.clone(), consts: Vec::new(), helpers: Vec::new() };
    let mut items = Vec::new();
    for i in 0..g.rng.gen_range(0..=2) {
        let sort = g.sort();
        let name = format!("k{i}");
        let value = g.literal(sort);
        let declared = if g.rng.gen_bool(0.5) { Some(sort) } else { None };
        items.push(Item::Const(ConstDecl { name: name.clone(), sort: declared, value, span: Span::default() }));
        g.consts.push((name, sort));
    }
    if !shape.encodable {
        for h in 0..shape.helpers {
            let np = g.rng.gen_range(1..=2);
            let nl = g.rng.gen_range(0..=1);
            let params = g.decls("a", np, None);
            let returns = g.decls("r", 1, None);
            let locals = g.decls("t", nl, None);
            let name = format!("h{h}");
            let ret = returns[0].sort;
            let ps = params.iter().map(|d| d.sort).collect();
            let node = g.node(name.clone(), params, returns, locals, false);
            items.push(Item::Node(node));
            g.helpers.push(Helper { name, params: ps, ret });
        }
    }
    let np = g.rng.gen_range(1..=3);
    let nr = g.rng.gen_range(1..=2);
    let nl = g.rng.gen_range(0..=2);
    let params = g.decls("i", np, None);
    let first = if shape.encodable { Some(Sort::Bool) } else { None };
    let returns = g.decls("o", nr, first);
    let returns = if shape.encodable {
        // exactly one boolean output, used as the property
        returns
            .into_iter()
            .enumerate()
            .map(|(i, mut d)| {
                if i > 0 && d.sort == Sort::Bool {
                    d.sort = numeric(&shape.sorts).first().copied().unwrap_or(Sort::Bool);
                }
                d
            })
            .collect()
    } else {
        returns
    };
    let locals = g.decls("l", nl, None);
    let main = g.node("main".to_string(), params, returns, locals, true);
    items.push(Item::Node(main));
    Program { items }
}

/// Random values for the parameters of `node`.
pub fn stream_inputs(rng: &mut impl Rng, node: &Node) -> BTreeMap<String, Value> {
    node.params
        .iter()
        .map(|d| {
            let v = match d.sort {
                Sort::Bool => Value::Bool(rng.gen_bool(0.5)),
                Sort::Int => Value::Num(ratio(rng.gen_range(-5..=5), 1)),
                Sort::Real => Value::Num(ratio(rng.gen_range(-20..=20), 4)),
            };
            (d.name.clone(), v)
        })
        .collect()
}
