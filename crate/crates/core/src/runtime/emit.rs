//! C99 source for a controller.
//!
//! Double mode compares with a 1e-9 tolerance so that values which are
//! exactly on a guard boundary, but reached through rounded arithmetic,
//! take the same branch as the exact interpreter. Rational mode keeps
//! `long long` numerator/denominator pairs and is exact until overflow.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Controller, RuntimeError};
use crate::encode::TransitionSystem;
use crate::logic::{Assign, Formula, Rational, RelOp, Sort, Term, Value, Var};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumMode {
    #[default]
    Double,
    Rational,
}

const KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum", "extern", "float",
    "for", "goto", "if", "inline", "int", "long", "register", "restrict", "return", "short", "signed", "sizeof",
    "static", "struct", "switch", "typedef", "union", "unsigned", "void", "volatile", "while", "_Bool", "_Complex",
    "_Imaginary", "bool", "true", "false",
];

/// C field names for the variables, unique and keyword-free.
fn field_names(vars: &[Var]) -> BTreeMap<Var, String> {
    let mut used = BTreeSet::new();
    let mut out = BTreeMap::new();
    for v in vars {
        let mut base: String =
            v.name().chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
        if base.is_empty() || base.starts_with(|c: char| c.is_ascii_digit()) || KEYWORDS.contains(&base.as_str()) {
            base = format!("v_{base}");
        }
        let mut name = base.clone();
        let mut k = 1;
        while !used.insert(name.clone()) {
            name = format!("{base}_{k}");
            k += 1;
        }
        out.insert(v.clone(), name);
    }
    out
}

struct Emitter {
    mode: NumMode,
    /// Variable to C lvalue.
    access: BTreeMap<Var, String>,
}

impl Emitter {
    fn constant(&self, r: &Rational) -> Result<String, RuntimeError> {
        match self.mode {
            NumMode::Double => Ok(if r.denom() == &1.into() {
                format!("{}.0", r.numer())
            } else {
                format!("({}.0 / {}.0)", r.numer(), r.denom())
            }),
            NumMode::Rational => {
                let n = r.numer().to_i64().ok_or_else(|| RuntimeError::ConstantTooLarge(r.to_string()))?;
                let d = r.denom().to_i64().ok_or_else(|| RuntimeError::ConstantTooLarge(r.to_string()))?;
                Ok(format!("rs_mk({n}LL, {d}LL)"))
            }
        }
    }

    fn var(&self, v: &Var) -> Result<String, RuntimeError> {
        self.access.get(v).cloned().ok_or_else(|| RuntimeError::Malformed(format!("unknown variable {v}")))
    }

    fn term(&self, t: &Term) -> Result<String, RuntimeError> {
        let rat = self.mode == NumMode::Rational;
        Ok(match t {
            Term::Const(r) => self.constant(r)?,
            Term::Var(v) => self.var(v)?,
            Term::Neg(a) if rat => format!("rs_neg({})", self.term(a)?),
            Term::Neg(a) => format!("(-{})", self.term(a)?),
            Term::Add(ts) if ts.is_empty() => self.constant(&Rational::from_integer(0.into()))?,
            Term::Add(ts) if rat => {
                let mut acc = self.term(&ts[0])?;
                for t in &ts[1..] {
                    acc = format!("rs_add({acc}, {})", self.term(t)?);
                }
                acc
            }
            Term::Add(ts) => {
                let parts = ts.iter().map(|t| self.term(t)).collect::<Result<Vec<_>, _>>()?;
                format!("({})", parts.join(" + "))
            }
            Term::Mul(k, a) if rat => format!("rs_mul({}, {})", self.constant(k)?, self.term(a)?),
            Term::Mul(k, a) => format!("({} * {})", self.constant(k)?, self.term(a)?),
            Term::Ite(c, a, b) => format!("({} ? {} : {})", self.formula(c)?, self.term(a)?, self.term(b)?),
        })
    }

    fn junction(&self, fs: &[Formula], op: &str, unit: &str) -> Result<String, RuntimeError> {
        if fs.is_empty() {
            return Ok(unit.to_string());
        }
        let parts = fs.iter().map(|f| self.formula(f)).collect::<Result<Vec<_>, _>>()?;
        Ok(format!("({})", parts.join(op)))
    }

    fn formula(&self, f: &Formula) -> Result<String, RuntimeError> {
        Ok(match f {
            Formula::True => "true".into(),
            Formula::False => "false".into(),
            Formula::BoolVar(v) => self.var(v)?,
            Formula::Not(g) => format!("(!{})", self.formula(g)?),
            Formula::And(fs) => self.junction(fs, " && ", "true")?,
            Formula::Or(fs) => self.junction(fs, " || ", "false")?,
            Formula::Implies(a, b) => format!("(!{} || {})", self.formula(a)?, self.formula(b)?),
            Formula::Iff(a, b) => format!("({} == {})", self.formula(a)?, self.formula(b)?),
            Formula::Divides(k, t) => {
                let k = k.to_i64().ok_or_else(|| RuntimeError::ConstantTooLarge(k.to_string()))?;
                format!("rs_divides({}, {k}LL)", self.term(t)?)
            }
            Formula::Atom(a, op, b) => {
                let (a, b) = (self.term(a)?, self.term(b)?);
                match self.mode {
                    NumMode::Rational => format!("(rs_cmp({a}, {b}) {} 0)", c_op(*op)),
                    NumMode::Double => match op {
                        RelOp::Le => format!("rs_le({a}, {b})"),
                        RelOp::Lt => format!("rs_lt({a}, {b})"),
                        RelOp::Ge => format!("rs_le({b}, {a})"),
                        RelOp::Gt => format!("rs_lt({b}, {a})"),
                        RelOp::Eq => format!("rs_eq({a}, {b})"),
                        RelOp::Ne => format!("(!rs_eq({a}, {b}))"),
                    },
                }
            }
        })
    }
}

fn c_op(op: RelOp) -> &'static str {
    match op {
        RelOp::Lt => "<",
        RelOp::Le => "<=",
        RelOp::Eq => "==",
        RelOp::Ne => "!=",
        RelOp::Ge => ">=",
        RelOp::Gt => ">",
    }
}

const DOUBLE_HELPERS: &str = r#"#define RS_EPS 1e-9

static inline bool rs_le(double a, double b) { return a <= b + RS_EPS; }
static inline bool rs_lt(double a, double b) { return a < b - RS_EPS; }
static inline bool rs_eq(double a, double b) { return a - b <= RS_EPS && b - a <= RS_EPS; }

static inline bool rs_divides(double t, long long k)
{
    double r = t < 0 ? -(double)(long long)(-t + 0.5) : (double)(long long)(t + 0.5);
    if (!rs_eq(t, r)) {
        return false;
    }
    return ((long long)r) % k == 0;
}
"#;

const RATIONAL_HELPERS: &str = r#"typedef struct {
    long long n;
    long long d;
} rs_rat;

static inline long long rs_gcd(long long a, long long b)
{
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        long long t = a % b;
        a = b;
        b = t;
    }
    return a;
}

static inline rs_rat rs_mk(long long n, long long d)
{
    rs_rat r;
    long long g;
    if (d < 0) {
        n = -n;
        d = -d;
    }
    g = rs_gcd(n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    r.n = n;
    r.d = d;
    return r;
}

static inline rs_rat rs_add(rs_rat a, rs_rat b)
{
    long long g = rs_gcd(a.d, b.d);
    return rs_mk(a.n * (b.d / g) + b.n * (a.d / g), (a.d / g) * b.d);
}

static inline rs_rat rs_mul(rs_rat a, rs_rat b)
{
    long long g1 = rs_gcd(a.n, b.d);
    long long g2 = rs_gcd(b.n, a.d);
    if (g1 == 0) g1 = 1;
    if (g2 == 0) g2 = 1;
    return rs_mk((a.n / g1) * (b.n / g2), (a.d / g2) * (b.d / g1));
}

static inline rs_rat rs_neg(rs_rat a)
{
    a.n = -a.n;
    return a;
}

static inline int rs_cmp(rs_rat a, rs_rat b)
{
    long long l = a.n * b.d;
    long long r = b.n * a.d;
    return (l > r) - (l < r);
}

static inline bool rs_divides(rs_rat t, long long k)
{
    return t.d == 1 && t.n % k == 0;
}
"#;

fn c_type(v: &Var, mode: NumMode) -> &'static str {
    match (v.sort(), mode) {
        (Sort::Bool, _) => "bool",
        (_, NumMode::Double) => "double",
        (_, NumMode::Rational) => "rs_rat",
    }
}

fn record(out: &mut String, name: &str, vars: &[Var], fields: &BTreeMap<Var, String>, mode: NumMode) {
    let _ = writeln!(out, "typedef struct {{");
    if vars.is_empty() {
        let _ = writeln!(out, "    char unused_;");
    }
    for v in vars {
        let _ = writeln!(out, "    {} {};", c_type(v, mode), fields[v]);
    }
    let _ = writeln!(out, "}} {name};\n");
}

/// SHA-256 of the transition system's SMT-LIB rendering.
pub fn contract_hash(ts: &TransitionSystem) -> String {
    Sha256::digest(ts.to_smtlib().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// A self-contained C99 translation unit for `c`.
///
/// Layout: header comment with the contract hash, the `state` and `inputs`
/// records, `init`, `step`, and a stdin-driven harness compiled only with
/// `-DREACSYNTH_HARNESS`. The harness reads one whitespace-separated value
/// per input and step (`n`, `n/d`, `true`/`false`) and prints the state
/// after `init` and after every step.
pub fn emit_c(c: &Controller, ts: &TransitionSystem, mode: NumMode) -> Result<String, RuntimeError> {
    let sf = field_names(&c.state);
    let inf = field_names(&c.inputs);
    let mut access: BTreeMap<Var, String> = sf.iter().map(|(v, n)| (v.clone(), format!("s->{n}"))).collect();
    access.extend(inf.iter().map(|(v, n)| (v.clone(), format!("in->{n}"))));
    let em = Emitter { mode, access };

    let mut out = String::new();
    let _ = writeln!(out, "/* Controller for {}", c.name.replace("*/", "* /"));
    let _ = writeln!(out, " * contract sha256: {}", contract_hash(ts));
    let _ = writeln!(out, " * cases: {}, numeric mode: {:?}", c.cases.len(), mode);
    let _ = writeln!(out, " */\n");
    let _ = writeln!(out, "#include <stdbool.h>\n");
    out.push_str(if mode == NumMode::Double { DOUBLE_HELPERS } else { RATIONAL_HELPERS });
    out.push('\n');
    record(&mut out, "state", &c.state, &sf, mode);
    record(&mut out, "inputs", &c.inputs, &inf, mode);

    let _ = writeln!(out, "void init(state *s);\nvoid step(state *s, const inputs *in);\n");
    let _ = writeln!(out, "void init(state *s)\n{{");
    for v in &c.state {
        let value = match c.initial.get(v) {
            Some(Value::Bool(b)) => b.to_string(),
            Some(Value::Num(r)) => em.constant(r)?,
            None => return Err(RuntimeError::MissingAssignment(v.name().to_string())),
        };
        let _ = writeln!(out, "    s->{} = {value};", sf[v]);
    }
    let _ = writeln!(out, "}}\n");

    let _ = writeln!(out, "void step(state *s, const inputs *in)\n{{");
    let _ = writeln!(out, "    state n = *s;\n    (void)in;");
    let last = c.cases.len().saturating_sub(1);
    for (k, case) in c.cases.iter().enumerate() {
        // the last guard is the residue of the others: plain else
        if k == 0 && k == last {
            let _ = writeln!(out, "    {{");
        } else if k == 0 {
            let _ = writeln!(out, "    if ({}) {{", em.formula(&case.guard)?);
        } else if k == last {
            let _ = writeln!(out, "    }} else {{");
        } else {
            let _ = writeln!(out, "    }} else if ({}) {{", em.formula(&case.guard)?);
        }
        for v in &c.state {
            let rhs = match case.assigns.get(v) {
                Some(Assign::Num(t)) => em.term(t)?,
                Some(Assign::Bool(f)) => em.formula(f)?,
                None => return Err(RuntimeError::MissingAssignment(v.name().to_string())),
            };
            let _ = writeln!(out, "        n.{} = {rhs};", sf[v]);
        }
    }
    if !c.cases.is_empty() {
        let _ = writeln!(out, "    }}");
    }
    let _ = writeln!(out, "    *s = n;\n}}\n");

    harness(&mut out, c, &sf, &inf, mode);
    Ok(out)
}

fn harness(out: &mut String, c: &Controller, sf: &BTreeMap<Var, String>, inf: &BTreeMap<Var, String>, mode: NumMode) {
    let _ = writeln!(out, "#ifdef REACSYNTH_HARNESS\n#include <stdio.h>\n#include <stdlib.h>\n#include <string.h>\n");
    out.push_str(
        r#"static inline int rs_read(long long *n, long long *d, bool *b)
{
    char tok[128];
    char *end;
    if (scanf("%127s", tok) != 1) {
        return 0;
    }
    *b = strcmp(tok, "true") == 0 || strcmp(tok, "1") == 0;
    *d = 1;
    *n = strtoll(tok, &end, 10);
    if (*end == '/') {
        *d = strtoll(end + 1, &end, 10);
    }
    return 1;
}

"#,
    );
    let _ = writeln!(out, "static void rs_print(const state *s)\n{{");
    for (k, v) in c.state.iter().enumerate() {
        let sep = if k == 0 { "" } else { " " };
        let f = &sf[v];
        let _ = match (v.sort(), mode) {
            (Sort::Bool, _) => writeln!(out, "    printf(\"{sep}%d\", s->{f} ? 1 : 0);"),
            (_, NumMode::Double) => writeln!(out, "    printf(\"{sep}%.17g\", s->{f});"),
            (_, NumMode::Rational) => writeln!(out, "    printf(\"{sep}%lld/%lld\", s->{f}.n, s->{f}.d);"),
        };
    }
    let _ = writeln!(out, "    printf(\"\\n\");\n}}\n");
    let _ = writeln!(out, "int main(void)\n{{\n    state st;\n    inputs in;\n    long long n, d;\n    bool b;");
    let _ = writeln!(out, "    memset(&in, 0, sizeof in);\n    (void)n;\n    (void)d;\n    (void)b;");
    let _ = writeln!(out, "    init(&st);\n    rs_print(&st);\n    for (;;) {{");
    if c.inputs.is_empty() {
        // closed system: one empty line per step
        let _ = writeln!(out, "        int ch = getchar();\n        if (ch == EOF) {{\n            return 0;\n        }}");
        let _ = writeln!(out, "        if (ch != '\\n') {{\n            continue;\n        }}");
    }
    for v in &c.inputs {
        let f = &inf[v];
        let _ = writeln!(out, "        if (!rs_read(&n, &d, &b)) {{\n            return 0;\n        }}");
        let _ = match (v.sort(), mode) {
            (Sort::Bool, _) => writeln!(out, "        in.{f} = b;"),
            (_, NumMode::Double) => writeln!(out, "        in.{f} = (double)n / (double)d;"),
            (_, NumMode::Rational) => writeln!(out, "        in.{f} = rs_mk(n, d);"),
        };
    }
    let _ = writeln!(out, "        step(&st, &in);\n        rs_print(&st);\n    }}\n}}\n#endif");
}

/// Non-blank lines.
pub fn loc(source: &str) -> usize {
    source.lines().filter(|l| !l.trim().is_empty()).count()
}

/// Flags the emitted code must compile cleanly under.
pub const STRICT_FLAGS: &[&str] = &["-std=c99", "-Wall", "-Wextra", "-pedantic", "-Werror"];

/// Compile `src` with the harness enabled; returns the compiler's stderr on
/// failure.
pub fn compile_harness(cc: &str, src: &std::path::Path, bin: &std::path::Path) -> Result<(), String> {
    let out = std::process::Command::new(cc)
        .args(STRICT_FLAGS)
        .arg("-O1")
        .arg("-DREACSYNTH_HARNESS")
        .arg("-o")
        .arg(bin)
        .arg(src)
        .output()
        .map_err(|e| format!("cannot run {cc}: {e}"))?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

/// Harness input for a sequence of input valuations, one line per step.
pub fn script(c: &Controller, inputs: &[crate::logic::Model]) -> String {
    let mut out = String::new();
    for m in inputs {
        let line: Vec<String> = c
            .inputs
            .iter()
            .map(|v| match m.get(v) {
                Some(x) => x.to_string(),
                None => "0".into(),
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
