//! Sort checking, constant folding, node inlining and directive resolution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::ast::*;
use super::{Diagnostic, LustreError, Span};
use crate::logic::{fmt_rational, Rational, Sort};

/// A sort-checked stream expression with constants folded and calls inlined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CExpr {
    Bool(bool),
    Num(Rational, Sort),
    Var(String, Sort),
    Not(Box<CExpr>),
    Neg(Box<CExpr>),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
    Ite(Box<CExpr>, Box<CExpr>, Box<CExpr>),
    Pre(Box<CExpr>),
    Arrow(Box<CExpr>, Box<CExpr>),
}

impl CExpr {
    pub fn sort(&self) -> Sort {
        match self {
            CExpr::Bool(_) | CExpr::Not(_) => Sort::Bool,
            CExpr::Num(_, s) | CExpr::Var(_, s) => *s,
            CExpr::Neg(a) | CExpr::Pre(a) => a.sort(),
            CExpr::Bin(op, a, _) => {
                if op.is_comparison()
                    || matches!(op, BinOp::And | BinOp::Or | BinOp::Xor | BinOp::Implies)
                {
                    Sort::Bool
                } else {
                    a.sort()
                }
            }
            CExpr::Ite(_, t, _) | CExpr::Arrow(t, _) => t.sort(),
        }
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            CExpr::Num(r, _) => Some(r),
            _ => None,
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            CExpr::Bool(_) | CExpr::Num(..) => {}
            CExpr::Var(v, _) => {
                out.insert(v.clone());
            }
            CExpr::Not(a) | CExpr::Neg(a) | CExpr::Pre(a) => a.vars(out),
            CExpr::Bin(_, a, b) | CExpr::Arrow(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            CExpr::Ite(c, t, e) => {
                c.vars(out);
                t.vars(out);
                e.vars(out);
            }
        }
    }

    pub fn has_pre(&self) -> bool {
        match self {
            CExpr::Pre(_) => true,
            CExpr::Bool(_) | CExpr::Num(..) | CExpr::Var(..) => false,
            CExpr::Not(a) | CExpr::Neg(a) => a.has_pre(),
            CExpr::Bin(_, a, b) | CExpr::Arrow(a, b) => a.has_pre() || b.has_pre(),
            CExpr::Ite(c, t, e) => c.has_pre() || t.has_pre() || e.has_pre(),
        }
    }

    pub fn has_arrow(&self) -> bool {
        match self {
            CExpr::Arrow(..) => true,
            CExpr::Bool(_) | CExpr::Num(..) | CExpr::Var(..) => false,
            CExpr::Not(a) | CExpr::Neg(a) | CExpr::Pre(a) => a.has_arrow(),
            CExpr::Bin(_, a, b) => a.has_arrow() || b.has_arrow(),
            CExpr::Ite(c, t, e) => c.has_arrow() || t.has_arrow() || e.has_arrow(),
        }
    }
}

impl fmt::Display for CExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CExpr::Bool(b) => write!(f, "{b}"),
            CExpr::Num(r, _) => write!(f, "{}", fmt_rational(r)),
            CExpr::Var(v, _) => write!(f, "{v}"),
            CExpr::Not(a) => write!(f, "(not {a})"),
            CExpr::Neg(a) => write!(f, "(- {a})"),
            CExpr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            CExpr::Ite(c, t, e) => write!(f, "(if {c} then {t} else {e})"),
            CExpr::Pre(a) => write!(f, "pre({a})"),
            CExpr::Arrow(a, b) => write!(f, "({a} -> {b})"),
        }
    }
}

/// The synthesis node after elaboration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckedContract {
    pub node: String,
    /// Environment-controlled inputs (the REALIZABLE list).
    pub inputs: Vec<(String, Sort)>,
    /// Controller-owned streams: remaining parameters, outputs, locals and
    /// locals introduced by inlining.
    pub state: Vec<(String, Sort)>,
    pub equations: Vec<(String, CExpr)>,
    pub asserts: Vec<CExpr>,
    pub properties: Vec<String>,
}

impl CheckedContract {
    pub fn sort_of(&self, name: &str) -> Option<Sort> {
        self.inputs.iter().chain(&self.state).find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    pub fn is_input(&self, name: &str) -> bool {
        self.inputs.iter().any(|(n, _)| n == name)
    }

    pub fn equation(&self, name: &str) -> Option<&CExpr> {
        self.equations.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }
}

fn err_sort(span: Span, msg: impl Into<String>) -> LustreError {
    LustreError::SortMismatch(Diagnostic::error(span, msg))
}

#[derive(Clone)]
enum Binding {
    Value(CExpr),
    Stream(String, Sort),
}

struct Ctx<'a> {
    program: &'a Program,
    consts: BTreeMap<String, CExpr>,
    used_names: BTreeSet<String>,
    call_counter: usize,
    stack: Vec<String>,
    equations: Vec<(String, CExpr)>,
    asserts: Vec<CExpr>,
    fresh: Vec<(String, Sort)>,
}

pub fn elaborate(p: &Program) -> Result<CheckedContract, LustreError> {
    let mut ctx = Ctx {
        program: p,
        consts: BTreeMap::new(),
        used_names: BTreeSet::new(),
        call_counter: 0,
        stack: Vec::new(),
        equations: Vec::new(),
        asserts: Vec::new(),
        fresh: Vec::new(),
    };
    for c in p.consts() {
        if ctx.consts.contains_key(&c.name) {
            return Err(LustreError::MultipleDefinitions(Diagnostic::error(
                c.span,
                format!("constant `{}` defined twice", c.name),
            )));
        }
        let env = BTreeMap::new();
        let v = ctx.expr(&c.value, &env)?;
        if !matches!(v, CExpr::Bool(_) | CExpr::Num(..)) {
            return Err(LustreError::Unsupported(Diagnostic::error(
                c.span,
                format!("constant `{}` does not fold to a literal", c.name),
            )));
        }
        if let Some(s) = c.sort {
            if s != v.sort() {
                return Err(err_sort(c.span, format!("constant `{}` is not of type {s}", c.name)));
            }
        }
        ctx.consts.insert(c.name.clone(), v);
    }
    let mut seen = BTreeSet::new();
    for n in p.nodes() {
        if !seen.insert(n.name.clone()) {
            return Err(LustreError::MultipleDefinitions(Diagnostic::error(
                n.span,
                format!("node `{}` defined twice", n.name),
            )));
        }
        for d in n.params.iter().chain(&n.returns).chain(&n.locals) {
            ctx.used_names.insert(d.name.clone());
        }
    }

    let main = synthesis_node(p)?;
    let (inputs, properties) = directives(p, main)?;

    let mut env: BTreeMap<String, Binding> = BTreeMap::new();
    let mut declared = BTreeSet::new();
    for d in main.params.iter().chain(&main.returns).chain(&main.locals) {
        if !declared.insert(d.name.clone()) || ctx.consts.contains_key(&d.name) {
            return Err(LustreError::MultipleDefinitions(Diagnostic::error(
                d.span,
                format!("`{}` declared twice", d.name),
            )));
        }
        env.insert(d.name.clone(), Binding::Stream(d.name.clone(), d.sort));
    }
    ctx.stack.push(main.name.clone());
    ctx.body(main, &env, None)?;
    ctx.stack.pop();

    let input_set: BTreeSet<&str> = inputs.iter().map(String::as_str).collect();
    let mut state = Vec::new();
    let mut input_vars = Vec::new();
    for d in &main.params {
        if input_set.contains(d.name.as_str()) {
            input_vars.push((d.name.clone(), d.sort));
        } else {
            state.push((d.name.clone(), d.sort));
        }
    }
    for d in main.returns.iter().chain(&main.locals) {
        state.push((d.name.clone(), d.sort));
    }
    state.extend(ctx.fresh.iter().cloned());

    Ok(CheckedContract {
        node: main.name.clone(),
        inputs: input_vars,
        state,
        equations: ctx.equations,
        asserts: ctx.asserts,
        properties,
    })
}

fn synthesis_node(p: &Program) -> Result<&Node, LustreError> {
    let with: Vec<&Node> = p.nodes().filter(|n| n.directives().next().is_some()).collect();
    match with.as_slice() {
        [n] => Ok(n),
        [] => p.nodes().last().ok_or_else(|| {
            LustreError::Syntax(Diagnostic::error(Span::default(), "no node declared"))
        }),
        [_, second, ..] => Err(LustreError::Directive(Diagnostic::error(
            second.span,
            "directives appear in more than one node",
        ))),
    }
}

fn directives(p: &Program, main: &Node) -> Result<(Vec<String>, Vec<String>), LustreError> {
    let top = p.items.iter().filter_map(|i| match i {
        Item::Directive(d) => Some(d),
        _ => None,
    });
    let mut realizable: Option<Vec<String>> = None;
    let mut properties = Vec::new();
    for d in top.chain(main.directives()) {
        match d {
            Directive::Realizable(names) => {
                let list = realizable.get_or_insert_with(Vec::new);
                for (n, sp) in names {
                    if !main.params.iter().any(|d| d.name == *n) {
                        return Err(LustreError::Directive(Diagnostic::error(
                            *sp,
                            format!("REALIZABLE names `{n}`, which is not a parameter of `{}`", main.name),
                        )));
                    }
                    if !list.contains(n) {
                        list.push(n.clone());
                    }
                }
            }
            Directive::Property(n, sp) => {
                let decl = main.params.iter().chain(&main.returns).chain(&main.locals).find(|d| d.name == *n);
                match decl {
                    Some(d) if d.sort == Sort::Bool => {
                        if !properties.contains(n) {
                            properties.push(n.clone());
                        }
                    }
                    Some(_) => {
                        return Err(err_sort(*sp, format!("PROPERTY `{n}` is not boolean")));
                    }
                    None => {
                        return Err(LustreError::UnknownIdentifier(Diagnostic::error(
                            *sp,
                            format!("PROPERTY names unknown `{n}`"),
                        )));
                    }
                }
            }
        }
    }
    let inputs = realizable.unwrap_or_else(|| main.params.iter().map(|d| d.name.clone()).collect());
    if let Some(p) = properties.iter().find(|p| inputs.contains(p)) {
        return Err(LustreError::Directive(Diagnostic::error(
            main.span,
            format!("`{p}` cannot be both an input and the property"),
        )));
    }
    if properties.is_empty() {
        let bools: Vec<&Decl> = main.returns.iter().filter(|d| d.sort == Sort::Bool).collect();
        if let [only] = bools.as_slice() {
            properties.push(only.name.clone());
        }
    }
    Ok((inputs, properties))
}

/// Reject `pre` that would be evaluated at the first instant.
fn check_initial(e: &CExpr, span: Span) -> Result<(), LustreError> {
    match e {
        CExpr::Pre(_) => Err(LustreError::IllegalPre(Diagnostic::error(
            span,
            format!("`{e}` has no value at the first instant; guard it with `->`"),
        ))),
        CExpr::Arrow(a, _) => check_initial(a, span),
        CExpr::Bool(_) | CExpr::Num(..) | CExpr::Var(..) => Ok(()),
        CExpr::Not(a) | CExpr::Neg(a) => check_initial(a, span),
        CExpr::Bin(_, a, b) => {
            check_initial(a, span)?;
            check_initial(b, span)
        }
        CExpr::Ite(c, t, f) => {
            check_initial(c, span)?;
            check_initial(t, span)?;
            check_initial(f, span)
        }
    }
}

impl<'a> Ctx<'a> {
    /// Elaborate a node body; `callee_params` is set when inlining.
    fn body(
        &mut self,
        node: &Node,
        env: &BTreeMap<String, Binding>,
        callee_params: Option<&BTreeSet<String>>,
    ) -> Result<(), LustreError> {
        let mut defined: BTreeMap<String, Span> = BTreeMap::new();
        for (lhs, rhs, span) in node.equations() {
            let target = match env.get(lhs) {
                Some(Binding::Stream(name, sort)) => (name.clone(), *sort),
                Some(Binding::Value(_)) => {
                    return Err(LustreError::Unsupported(Diagnostic::error(
                        span,
                        format!("cannot define parameter `{lhs}` of `{}`", node.name),
                    )));
                }
                None => {
                    return Err(LustreError::UnknownIdentifier(Diagnostic::error(
                        span,
                        format!("`{lhs}` is not declared in `{}`", node.name),
                    )));
                }
            };
            if callee_params.is_some_and(|ps| ps.contains(lhs)) {
                return Err(LustreError::Unsupported(Diagnostic::error(
                    span,
                    format!("cannot define parameter `{lhs}` of `{}`", node.name),
                )));
            }
            if let Some(first) = defined.insert(lhs.to_string(), span) {
                return Err(LustreError::MultipleDefinitions(Diagnostic::error(
                    span,
                    format!("`{lhs}` already defined at {first}"),
                )));
            }
            let e = self.expr(rhs, env)?;
            if e.sort() != target.1 {
                return Err(err_sort(
                    span,
                    format!("`{lhs}` has type {} but its equation has type {}", target.1, e.sort()),
                ));
            }
            check_initial(&e, span)?;
            self.equations.push((target.0, e));
        }
        for d in node.returns.iter().chain(&node.locals) {
            if !defined.contains_key(&d.name) {
                return Err(LustreError::MissingDefinition(Diagnostic::error(
                    d.span,
                    format!("`{}` has no defining equation", d.name),
                )));
            }
        }
        for s in &node.body {
            if let Statement::Assert(e, span) = s {
                let c = self.expr(e, env)?;
                if c.sort() != Sort::Bool {
                    return Err(err_sort(*span, "assertion is not boolean"));
                }
                check_initial(&c, *span)?;
                self.asserts.push(c);
            }
        }
        Ok(())
    }

    fn fresh_name(&mut self, node: &str, var: &str) -> String {
        loop {
            self.call_counter += 1;
            let name = format!("{node}_{}_{var}", self.call_counter);
            if self.used_names.insert(name.clone()) {
                return name;
            }
        }
    }

    fn inline(&mut self, name: &str, args: &[Expr], span: Span, env: &BTreeMap<String, Binding>) -> Result<CExpr, LustreError> {
        let callee = self.program.node(name).ok_or_else(|| {
            LustreError::UnknownIdentifier(Diagnostic::error(span, format!("unknown node `{name}`")))
        })?;
        if self.stack.iter().any(|n| n == name) {
            return Err(LustreError::RecursiveNodeCall(Diagnostic::error(
                span,
                format!("`{name}` calls itself through {}", self.stack.join(" -> ")),
            )));
        }
        if callee.returns.len() != 1 {
            return Err(LustreError::Unsupported(Diagnostic::error(
                span,
                format!("`{name}` must return exactly one value to be used in an expression"),
            )));
        }
        if args.len() != callee.params.len() {
            return Err(err_sort(
                span,
                format!("`{name}` expects {} arguments, got {}", callee.params.len(), args.len()),
            ));
        }
        let mut inner: BTreeMap<String, Binding> = BTreeMap::new();
        for (p, a) in callee.params.iter().zip(args) {
            let v = self.expr(a, env)?;
            if v.sort() != p.sort {
                return Err(err_sort(a.span, format!("argument `{}` of `{name}` must be {}", p.name, p.sort)));
            }
            inner.insert(p.name.clone(), Binding::Value(v));
        }
        let mut out = None;
        for d in callee.returns.iter().chain(&callee.locals) {
            if inner.contains_key(&d.name) {
                return Err(LustreError::MultipleDefinitions(Diagnostic::error(
                    d.span,
                    format!("`{}` declared twice", d.name),
                )));
            }
            let fresh = self.fresh_name(name, &d.name);
            self.fresh.push((fresh.clone(), d.sort));
            if out.is_none() {
                out = Some(CExpr::Var(fresh.clone(), d.sort));
            }
            inner.insert(d.name.clone(), Binding::Stream(fresh, d.sort));
        }
        let params: BTreeSet<String> = callee.params.iter().map(|d| d.name.clone()).collect();
        self.stack.push(name.to_string());
        self.body(callee, &inner, Some(&params))?;
        self.stack.pop();
        Ok(out.expect("one output"))
    }

    fn expr(&mut self, e: &Expr, env: &BTreeMap<String, Binding>) -> Result<CExpr, LustreError> {
        let sp = e.span;
        Ok(match &e.kind {
            ExprKind::Bool(b) => CExpr::Bool(*b),
            ExprKind::Int(n) => CExpr::Num(Rational::from_integer(n.clone()), Sort::Int),
            ExprKind::Real(r) => CExpr::Num(r.clone(), Sort::Real),
            ExprKind::Ident(name) => match env.get(name) {
                Some(Binding::Stream(n, s)) => CExpr::Var(n.clone(), *s),
                Some(Binding::Value(v)) => v.clone(),
                None => match self.consts.get(name) {
                    Some(v) => v.clone(),
                    None => {
                        return Err(LustreError::UnknownIdentifier(Diagnostic::error(
                            sp,
                            format!("unknown identifier `{name}`"),
                        )))
                    }
                },
            },
            ExprKind::Unary(UnOp::Not, a) => {
                let a = self.expr(a, env)?;
                if a.sort() != Sort::Bool {
                    return Err(err_sort(sp, "`not` needs a boolean"));
                }
                match a {
                    CExpr::Bool(b) => CExpr::Bool(!b),
                    a => CExpr::Not(Box::new(a)),
                }
            }
            ExprKind::Unary(UnOp::Neg, a) => {
                let a = self.expr(a, env)?;
                if !a.sort().is_numeric() {
                    return Err(err_sort(sp, "unary `-` needs a number"));
                }
                match a {
                    CExpr::Num(r, s) => CExpr::Num(-r, s),
                    a => CExpr::Neg(Box::new(a)),
                }
            }
            ExprKind::Binary(op, a, b) => {
                let a = self.expr(a, env)?;
                let b = self.expr(b, env)?;
                binary(*op, a, b, sp)?
            }
            ExprKind::If(c, t, f) => {
                let c = self.expr(c, env)?;
                let t = self.expr(t, env)?;
                let f = self.expr(f, env)?;
                if c.sort() != Sort::Bool {
                    return Err(err_sort(sp, "`if` condition is not boolean"));
                }
                if t.sort() != f.sort() {
                    return Err(err_sort(sp, format!("`if` branches have types {} and {}", t.sort(), f.sort())));
                }
                match c {
                    CExpr::Bool(true) => t,
                    CExpr::Bool(false) => f,
                    c => CExpr::Ite(Box::new(c), Box::new(t), Box::new(f)),
                }
            }
            ExprKind::Pre(a) => {
                let a = self.expr(a, env)?;
                CExpr::Pre(Box::new(a))
            }
            ExprKind::Arrow(a, b) => {
                let a = self.expr(a, env)?;
                let b = self.expr(b, env)?;
                if a.sort() != b.sort() {
                    return Err(err_sort(sp, format!("`->` sides have types {} and {}", a.sort(), b.sort())));
                }
                CExpr::Arrow(Box::new(a), Box::new(b))
            }
            ExprKind::Call(f, args) => self.inline(f, args, sp, env)?,
        })
    }
}

fn binary(op: BinOp, a: CExpr, b: CExpr, sp: Span) -> Result<CExpr, LustreError> {
    use BinOp::*;
    let (sa, sb) = (a.sort(), b.sort());
    match op {
        And | Or | Xor | Implies => {
            if sa != Sort::Bool || sb != Sort::Bool {
                return Err(err_sort(sp, format!("`{}` needs booleans", op.symbol())));
            }
            if let (CExpr::Bool(x), CExpr::Bool(y)) = (&a, &b) {
                return Ok(CExpr::Bool(match op {
                    And => *x && *y,
                    Or => *x || *y,
                    Xor => x != y,
                    _ => !*x || *y,
                }));
            }
        }
        Eq | Ne => {
            if sa != sb {
                return Err(err_sort(sp, format!("cannot compare {sa} with {sb}")));
            }
            match (&a, &b) {
                (CExpr::Bool(x), CExpr::Bool(y)) => return Ok(CExpr::Bool((x == y) == (op == Eq))),
                (CExpr::Num(x, _), CExpr::Num(y, _)) => return Ok(CExpr::Bool((x == y) == (op == Eq))),
                _ => {}
            }
        }
        Lt | Le | Gt | Ge => {
            if sa != sb || !sa.is_numeric() {
                return Err(err_sort(sp, format!("cannot order {sa} and {sb}")));
            }
            if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
                let r = match op {
                    Lt => x < y,
                    Le => x <= y,
                    Gt => x > y,
                    _ => x >= y,
                };
                return Ok(CExpr::Bool(r));
            }
        }
        Add | Sub | Mul => {
            if sa != sb || !sa.is_numeric() {
                return Err(err_sort(sp, format!("`{}` needs two numbers of one type, got {sa} and {sb}", op.symbol())));
            }
            if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
                let r = match op {
                    Add => x + y,
                    Sub => x - y,
                    _ => x * y,
                };
                return Ok(CExpr::Num(r, sa));
            }
        }
        Div => {
            if sa != Sort::Real || sb != Sort::Real {
                return Err(err_sort(sp, "`/` is real division; use `div` for integers"));
            }
            match b.as_num() {
                Some(k) if k.is_zero() => {
                    return Err(LustreError::Unsupported(Diagnostic::error(sp, "division by zero")));
                }
                Some(k) => {
                    if let Some(x) = a.as_num() {
                        return Ok(CExpr::Num(x / k, Sort::Real));
                    }
                }
                None => {
                    return Err(LustreError::Unsupported(Diagnostic::error(
                        sp,
                        "division is only supported by a nonzero constant",
                    )));
                }
            }
        }
        IntDiv | Mod => {
            if sa != Sort::Int || sb != Sort::Int {
                return Err(err_sort(sp, format!("`{}` needs integers", op.symbol())));
            }
            match b.as_num() {
                Some(k) if k.is_zero() => {
                    return Err(LustreError::Unsupported(Diagnostic::error(sp, "division by zero")));
                }
                Some(k) => {
                    if let Some(x) = a.as_num() {
                        let (q, r) = euclid(x, k);
                        return Ok(CExpr::Num(if op == IntDiv { q } else { r }, Sort::Int));
                    }
                }
                None => {
                    return Err(LustreError::Unsupported(Diagnostic::error(
                        sp,
                        format!("`{}` is only supported by a nonzero constant", op.symbol()),
                    )));
                }
            }
        }
    }
    Ok(CExpr::Bin(op, Box::new(a), Box::new(b)))
}

/// Euclidean quotient and remainder: `a = k·q + r`, `0 ≤ r < |k|`.
pub fn euclid(a: &Rational, k: &Rational) -> (Rational, Rational) {
    let (a, k) = (a.to_integer(), k.to_integer());
    let r = a.mod_floor(&k.abs());
    let q = (&a - &r) / &k;
    debug_assert!(!r.is_negative() && (&k * &q + &r) == a);
    (Rational::from_integer(q), Rational::from_integer(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lustre::parse;

    fn load(s: &str) -> Result<CheckedContract, LustreError> {
        elaborate(&parse(s)?)
    }

    #[test]
    fn inlining_creates_fresh_locals_per_call() {
        let c = load(
            "node empty(b: real) returns (z: real); let z = 0.0; tel;
             node main(i: real) returns (ok: bool);
             var x, y: real;
             let x = empty(i); y = empty(i) + 1.0; ok = x <= y; tel;",
        )
        .unwrap();
        let fresh: Vec<&String> = c.state.iter().map(|(n, _)| n).filter(|n| n.starts_with("empty_")).collect();
        assert_eq!(fresh.len(), 2);
        assert_ne!(fresh[0], fresh[1]);
        assert_eq!(c.properties, vec!["ok".to_string()]);
    }

    #[test]
    fn self_reference_without_arrow_is_illegal_pre() {
        let e = load("node n() returns (x: int); let x = pre(x); tel;").unwrap_err();
        assert!(matches!(e, LustreError::IllegalPre(_)), "{e:?}");
    }

    #[test]
    fn recursion_is_rejected() {
        let e = load("node f(a: int) returns (b: int); let b = f(a); tel; node g(a: int) returns (ok: bool); let ok = f(a) > 0; tel;")
            .unwrap_err();
        assert!(matches!(e, LustreError::RecursiveNodeCall(_)), "{e:?}");
    }

    #[test]
    fn definitions_are_checked() {
        let twice = load("node n() returns (x: int); let x = 1; x = 2; tel;").unwrap_err();
        assert!(matches!(twice, LustreError::MultipleDefinitions(_)));
        let none = load("node n() returns (x: int); var y: int; let x = 1; tel;").unwrap_err();
        assert!(matches!(none, LustreError::MissingDefinition(_)));
        let unknown = load("node n() returns (x: int); let x = z; tel;").unwrap_err();
        assert!(matches!(unknown, LustreError::UnknownIdentifier(_)));
    }

    #[test]
    fn sorts_are_strict() {
        let e = load("node n(a: int) returns (x: real); let x = a + 1.0; tel;").unwrap_err();
        assert!(matches!(e, LustreError::SortMismatch(_)), "{e:?}");
    }

    #[test]
    fn constants_fold() {
        let c = load("const K = 2 * 3 + 1; node n(a: int) returns (ok: bool); let ok = a <= K div 2; tel;").unwrap();
        let CExpr::Bin(BinOp::Le, _, k) = c.equation("ok").unwrap() else { panic!() };
        assert_eq!(**k, CExpr::Num(Rational::from_integer(3.into()), Sort::Int));
    }

    #[test]
    fn euclidean_division() {
        let r = |n: i64| Rational::from_integer(n.into());
        assert_eq!(euclid(&r(-7), &r(3)), (r(-3), r(2)));
        assert_eq!(euclid(&r(7), &r(-3)), (r(-2), r(1)));
    }
}
