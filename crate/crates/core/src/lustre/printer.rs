//! Pretty-printer; output re-parses to the same tree.

use std::fmt::Write;

use super::ast::*;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use crate::logic::{fmt_rational, is_integral, Rational, Sort};

/// Exact decimal rendering when the denominator divides a power of ten.
pub fn decimal(r: &Rational) -> Option<String> {
    let mut d = r.denom().clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    while d.is_even() {
        d /= 2;
        twos += 1;
    }
    while d.is_multiple_of(&BigInt::from(5)) {
        d /= 5;
        fives += 1;
    }
    if !d.is_one() {
        return None;
    }
    let digits = twos.max(fives).max(1);
    let n = r.numer() * BigInt::from(10).pow(digits as u32) / r.denom();
    let mut s = n.abs().to_string();
    while s.len() <= digits {
        s.insert(0, '0');
    }
    let (int, frac) = s.split_at(s.len() - digits);
    let frac = frac.trim_end_matches('0');
    let frac = if frac.is_empty() { "0" } else { frac };
    Some(format!("{}{int}.{frac}", if n.is_negative() { "-" } else { "" }))
}

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for item in &p.items {
        match item {
            Item::Const(c) => {
                let _ = write!(out, "const {}", c.name);
                if let Some(s) = c.sort {
                    let _ = write!(out, " : {}", sort_name(s));
                }
                let _ = writeln!(out, " = {};", print_expr(&c.value));
            }
            Item::Directive(d) => {
                let _ = writeln!(out, "{}", print_directive(d));
            }
            Item::Node(n) => print_node(&mut out, n),
        }
        out.push('\n');
    }
    out
}

fn sort_name(s: Sort) -> &'static str {
    match s {
        Sort::Bool => "bool",
        Sort::Int => "int",
        Sort::Real => "real",
    }
}

fn print_directive(d: &Directive) -> String {
    match d {
        Directive::Realizable(names) => {
            let ns: Vec<&str> = names.iter().map(|(n, _)| n.as_str()).collect();
            format!("--%REALIZABLE {};", ns.join(", "))
        }
        Directive::Property(n, _) => format!("--%PROPERTY {n};"),
    }
}

fn decls(ds: &[Decl]) -> String {
    ds.iter().map(|d| format!("{}: {}", d.name, sort_name(d.sort))).collect::<Vec<_>>().join("; ")
}

fn print_node(out: &mut String, n: &Node) {
    let _ = writeln!(out, "node {}({}) returns ({});", n.name, decls(&n.params), decls(&n.returns));
    if !n.locals.is_empty() {
        let _ = writeln!(out, "var");
        for d in &n.locals {
            let _ = writeln!(out, "  {}: {};", d.name, sort_name(d.sort));
        }
    }
    let _ = writeln!(out, "let");
    for s in &n.body {
        match s {
            Statement::Equation { lhs, rhs, .. } => {
                let _ = writeln!(out, "  {lhs} = {};", print_expr(rhs));
            }
            Statement::Assert(e, _) => {
                let _ = writeln!(out, "  assert {};", print_expr(e));
            }
            Statement::Directive(d) => {
                let _ = writeln!(out, "  {}", print_directive(d));
            }
        }
    }
    let _ = writeln!(out, "tel;");
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Int(n) => n.to_string(),
        ExprKind::Real(r) => {
            if is_integral(r) {
                format!("{}.0", r.numer())
            } else if let Some(d) = decimal(r) {
                d
            } else {
                let s = fmt_rational(r);
                let (a, b) = s.split_once('/').expect("non-integral");
                format!("({a}.0 / {b}.0)")
            }
        }
        ExprKind::Ident(n) => n.clone(),
        ExprKind::Unary(UnOp::Neg, a) => format!("(- {})", print_expr(a)),
        ExprKind::Unary(UnOp::Not, a) => format!("(not {})", print_expr(a)),
        ExprKind::Binary(op, a, b) => format!("({} {} {})", print_expr(a), op.symbol(), print_expr(b)),
        ExprKind::If(c, t, f) => {
            format!("(if {} then {} else {})", print_expr(c), print_expr(t), print_expr(f))
        }
        ExprKind::Pre(a) => format!("pre({})", print_expr(a)),
        ExprKind::Arrow(a, b) => format!("({} -> {})", print_expr(a), print_expr(b)),
        ExprKind::Call(f, args) => {
            let a: Vec<String> = args.iter().map(print_expr).collect();
            format!("{f}({})", a.join(", "))
        }
    }
}
