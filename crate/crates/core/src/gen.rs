//! Seeded random generators for formulas, models and queries.
//!
//! Shared by property tests, the acceptance suite and benches.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encode::TransitionSystem;
use crate::logic::{ratio, Formula, Model, RelOp, Sort, Term, Value, Var};

pub mod contract;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct Shape {
    /// Maximum nesting of connectives.
    pub depth: u32,
    /// Maximum number of variables per linear term.
    pub term_width: usize,
    /// Coefficients are drawn from `-coeff..=coeff` (nonzero).
    pub coeff: i64,
    /// Constants are drawn from `-constant..=constant`.
    pub constant: i64,
    /// Allow constants with denominators 2 and 3 in real atoms.
    pub fractions: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { depth: 3, term_width: 2, coeff: 3, constant: 6, fractions: true }
    }
}

fn small_rational(rng: &mut impl Rng, bound: i64, fractions: bool) -> crate::logic::Rational {
    let n = rng.gen_range(-bound..=bound);
    let d = if fractions && rng.gen_bool(0.3) { rng.gen_range(2..=3) } else { 1 };
    ratio(n, d)
}

pub fn linear_term(rng: &mut impl Rng, vars: &[Var], shape: &Shape) -> Term {
    let numeric: Vec<&Var> = vars.iter().filter(|v| v.sort().is_numeric()).collect();
    let width = rng.gen_range(1..=shape.term_width.max(1));
    let mut parts = Vec::new();
    for _ in 0..width {
        if let Some(v) = numeric.choose(rng) {
            let mut k = rng.gen_range(-shape.coeff..=shape.coeff);
            if k == 0 {
                k = 1;
            }
            parts.push(Term::scale(ratio(k, 1), Term::var(v)));
        }
    }
    let reals = numeric.iter().any(|v| v.sort() == Sort::Real);
    parts.push(Term::constant(small_rational(rng, shape.constant, shape.fractions && reals)));
    Term::sum(parts)
}

pub fn atom(rng: &mut impl Rng, vars: &[Var], shape: &Shape) -> Formula {
    let bools: Vec<&Var> = vars.iter().filter(|v| v.sort() == Sort::Bool).collect();
    let has_numeric = vars.iter().any(|v| v.sort().is_numeric());
    if !bools.is_empty() && (!has_numeric || rng.gen_bool(0.2)) {
        let b = Formula::var(bools.choose(rng).expect("nonempty"));
        return if rng.gen_bool(0.5) { b } else { Formula::not(b) };
    }
    if !has_numeric {
        return if rng.gen_bool(0.5) { Formula::True } else { Formula::False };
    }
    let op = *[RelOp::Lt, RelOp::Le, RelOp::Eq, RelOp::Ne, RelOp::Ge, RelOp::Gt]
        .choose(rng)
        .expect("nonempty");
    let lhs = linear_term(rng, vars, shape);
    let rhs = Term::constant(small_rational(rng, shape.constant, false));
    Formula::Atom(lhs, op, rhs)
}

/// A random formula using every connective, built without simplification.
pub fn formula(rng: &mut impl Rng, vars: &[Var], shape: &Shape) -> Formula {
    formula_at(rng, vars, shape, shape.depth)
}

fn formula_at(rng: &mut impl Rng, vars: &[Var], shape: &Shape, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..20) {
            0 => Formula::True,
            1 => Formula::False,
            _ => atom(rng, vars, shape),
        };
    }
    let sub = |rng: &mut _| formula_at(rng, vars, shape, depth - 1);
    match rng.gen_range(0..6) {
        0 => Formula::Not(Box::new(sub(rng))),
        1 | 2 => {
            let n = rng.gen_range(2..=3);
            Formula::And((0..n).map(|_| sub(rng)).collect())
        }
        3 | 4 => {
            let n = rng.gen_range(2..=3);
            Formula::Or((0..n).map(|_| sub(rng)).collect())
        }
        _ => {
            let a = sub(rng);
            let b = sub(rng);
            if rng.gen_bool(0.5) {
                Formula::Implies(Box::new(a), Box::new(b))
            } else {
                Formula::Iff(Box::new(a), Box::new(b))
            }
        }
    }
}

/// A conjunction/disjunction of at most `atoms` atoms, in NNF.
pub fn cube_or_clause(rng: &mut impl Rng, vars: &[Var], shape: &Shape, atoms: usize) -> Formula {
    let n = rng.gen_range(1..=atoms.max(1));
    let lits: Vec<Formula> = (0..n).map(|_| atom(rng, vars, shape)).collect();
    if n > 2 && rng.gen_bool(0.4) {
        let cut = rng.gen_range(1..n);
        let (a, b) = lits.split_at(cut);
        Formula::Or(vec![Formula::And(a.to_vec()), Formula::And(b.to_vec())])
    } else {
        Formula::And(lits)
    }
}

pub fn model(rng: &mut impl Rng, vars: &[Var], bound: i64) -> Model {
    let mut m = Model::new();
    for v in vars {
        let value = match v.sort() {
            Sort::Bool => Value::Bool(rng.gen_bool(0.5)),
            Sort::Int => Value::Num(ratio(rng.gen_range(-bound..=bound), 1)),
            Sort::Real => Value::Num(small_rational(rng, bound, true)),
        };
        m.insert(v.clone(), value);
    }
    m
}

/// Pick a sort mix for `n` variables named `prefix0..`.
pub fn vars(rng: &mut impl Rng, prefix: &str, n: usize, sorts: &[Sort]) -> Vec<Var> {
    (0..n)
        .map(|i| Var::new(format!("{prefix}{i}"), *sorts.choose(rng).expect("nonempty")))
        .collect()
}

/// A random ∀∃ query: `(xs, ys, S, T)`.
pub fn ae_query(
    rng: &mut impl Rng,
    max_x: usize,
    max_y: usize,
    max_atoms: usize,
) -> (Vec<Var>, Vec<Var>, Formula, Formula) {
    let sorts = [Sort::Real, Sort::Real, Sort::Int, Sort::Bool];
    let nx = rng.gen_range(1..=max_x);
    let ny = rng.gen_range(1..=max_y);
    let xs = vars(rng, "x", nx, &sorts);
    let ys = vars(rng, "y", ny, &sorts);
    let shape = Shape { depth: 2, term_width: 3, coeff: 2, constant: 5, fractions: true };
    let s_atoms = rng.gen_range(0..=max_atoms / 3);
    let s = if s_atoms == 0 {
        Formula::True
    } else {
        cube_or_clause(rng, &xs, &shape, s_atoms)
    };
    let t_atoms = max_atoms.saturating_sub(s_atoms).max(1);
    let t = separated_cube_or_clause(rng, &xs, &ys, &shape, t_atoms);
    (xs, ys, s, t)
}

/// Like [`cube_or_clause`] over `xs ∪ ys`, except that integer `ys` only
/// occur in atoms over integer variables. Atoms mixing an integer
/// existential with reals have no finite projection cover without floor
/// terms.
pub fn separated_cube_or_clause(
    rng: &mut impl Rng,
    xs: &[Var],
    ys: &[Var],
    shape: &Shape,
    atoms: usize,
) -> Formula {
    let all: Vec<Var> = xs.iter().chain(ys).cloned().collect();
    let ints: Vec<Var> = all.iter().filter(|v| v.sort() != Sort::Real).cloned().collect();
    let reals: Vec<Var> = all
        .iter()
        .filter(|v| !(v.sort() == Sort::Int && ys.contains(v)))
        .cloned()
        .collect();
    let n = rng.gen_range(1..=atoms.max(1));
    let lits: Vec<Formula> = (0..n)
        .map(|_| {
            let pool = if rng.gen_bool(0.5) { &ints } else { &reals };
            let pool = if pool.is_empty() { &all } else { pool };
            atom(rng, pool, shape)
        })
        .collect();
    if n > 2 && rng.gen_bool(0.4) {
        let cut = rng.gen_range(1..n);
        let (a, b) = lits.split_at(cut);
        Formula::Or(vec![Formula::And(a.to_vec()), Formula::And(b.to_vec())])
    } else {
        Formula::And(lits)
    }
}

/// `lo ≤ v ≤ hi` for integer `v`, `true` otherwise.
fn bounds(v: &Var, lo: i64, hi: i64) -> Formula {
    if v.sort() != Sort::Int {
        return Formula::True;
    }
    Formula::and([Formula::ge(Term::var(v), Term::int(lo)), Formula::le(Term::var(v), Term::int(hi))])
}

/// A random transition system whose integer variables live in `0..=3`.
///
/// Up to three state variables and two inputs, each boolean or integer.
/// G_I and G_T bound every integer state variable (G_T on both copies) and
/// A bounds every integer input, so the system has finite domains.
pub fn finite_system(rng: &mut impl Rng, name: &str) -> TransitionSystem {
    let sorts = [Sort::Bool, Sort::Int, Sort::Int];
    let (ns, ni) = (rng.gen_range(1..=3), rng.gen_range(0..=2));
    let state = vars(rng, "s", ns, &sorts);
    let inputs = vars(rng, "i", ni, &sorts);
    let next: Vec<Var> = state.iter().map(Var::primed).collect();
    let shape = Shape { depth: 2, term_width: 2, coeff: 2, constant: 3, fractions: false };
    let si: Vec<Var> = state.iter().chain(&inputs).cloned().collect();
    let all: Vec<Var> = si.iter().chain(&next).cloned().collect();

    let mut a: Vec<Formula> = inputs.iter().map(|v| bounds(v, 0, 3)).collect();
    if rng.gen_bool(0.3) {
        a.push(cube_or_clause(rng, &si, &shape, 2));
    }
    let mut init: Vec<Formula> = state.iter().map(|v| bounds(v, 0, 3)).collect();
    if rng.gen_bool(0.6) {
        init.push(cube_or_clause(rng, &state, &shape, 2));
    }
    let mut trans: Vec<Formula> = state.iter().chain(&next).map(|v| bounds(v, 0, 3)).collect();
    // one update per state variable, sometimes loose
    for (x, xp) in state.iter().zip(&next) {
        let upd = match (x.sort(), rng.gen_range(0..4)) {
            (Sort::Bool, 0) => Formula::True,
            (Sort::Bool, _) => Formula::iff(Formula::var(xp), atom(rng, &si, &shape)),
            (_, 0) => Formula::True,
            (_, 1) => Formula::le(Term::var(xp), linear_term(rng, &si, &shape)),
            (_, _) => Formula::eq(Term::var(xp), linear_term(rng, &si, &shape)),
        };
        trans.push(upd);
    }
    if rng.gen_bool(0.5) {
        trans.push(formula_at(rng, &all, &shape, 1));
    }
    TransitionSystem::new(name, state, inputs, Formula::and(a), Formula::and(init), Formula::and(trans))
        .expect("generated scopes are consistent")
}

/// `b' = ¬b` under a free boolean input.
pub fn toggle() -> TransitionSystem {
    let b = Var::bool("b");
    let i = Var::bool("i");
    let trans = Formula::iff(Formula::var(&b.primed()), Formula::not(Formula::var(&b)));
    TransitionSystem::new("toggle", vec![b], vec![i], Formula::True, Formula::True, trans).expect("well scoped")
}

fn counter(name: &str, update: impl Fn(Term, Term) -> Formula) -> TransitionSystem {
    let c = Var::int("c");
    let i = Var::int("i");
    let cp = Term::var(&c.primed());
    let a = bounds(&i, 0, 1);
    let init = Formula::eq(Term::var(&c), Term::int(0));
    let trans = Formula::and([
        bounds(&c, 0, 10),
        update(Term::var(&c), Term::var(&i)),
        Formula::ge(cp.clone(), Term::int(0)),
        Formula::le(cp, Term::int(10)),
    ]);
    TransitionSystem::new(name, vec![c], vec![i], a, init, trans).expect("well scoped")
}

/// `c' = ite(reset, 0, c + 1)` as a case split.
fn reset_or_step(c: Term, reset: Formula) -> Formula {
    let cp = Term::var(&Var::int("c").primed());
    Formula::and([
        Formula::implies(reset.clone(), Formula::eq(cp.clone(), Term::int(0))),
        Formula::implies(Formula::not(reset), Formula::eq(cp, Term::sum([c, Term::int(1)]))),
    ])
}

/// `c' = c + i` with `c' ≤ 10`: the environment keeps adding until overflow.
pub fn overflow_counter() -> TransitionSystem {
    counter("overflow_counter", |c, i| Formula::eq(Term::var(&Var::int("c").primed()), Term::sum([c, i])))
}

/// `c' = ite(i = 1, 0, c + 1)` with `c' ≤ 10`. Holding `i = 0` still
/// overflows.
pub fn reset_counter() -> TransitionSystem {
    counter("reset_counter", |c, i| reset_or_step(c, Formula::eq(i, Term::int(1))))
}

/// Like [`reset_counter`] but also wrapping at 10, so every state is viable.
pub fn wrap_counter() -> TransitionSystem {
    counter("wrap_counter", |c, i| {
        let reset = Formula::or([Formula::eq(i, Term::int(1)), Formula::eq(c.clone(), Term::int(10))]);
        reset_or_step(c, reset)
    })
}

/// The hand-written finite systems.
pub fn hand_systems() -> Vec<TransitionSystem> {
    vec![toggle(), overflow_counter(), reset_counter(), wrap_counter()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seed_deterministic() {
        let a = ae_query(&mut rng(7), 3, 2, 8);
        let b = ae_query(&mut rng(7), 3, 2, 8);
        assert_eq!(format!("{:?}", a), format!("{:?}", b));
    }
}
