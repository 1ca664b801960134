//! Explicit-state reference for realizability on finite domains.
//!
//! Enumerates every state and input, builds the successor table and removes
//! states that some admissible input drives out of the candidate set, until
//! nothing changes. What is left is the greatest fixpoint: the viable states.

use serde::Serialize;

use crate::encode::{FiniteDomains, NotFinite, TransitionSystem};
use crate::logic::{eval, simplify, substitute, Assign, Formula, LogicError, Model, Subst, Term, Value, Var};

/// Largest `|states| · |inputs|` the oracle will enumerate.
pub const MAX_SPACE: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("state/input space of {0} points exceeds the limit of {MAX_SPACE}")]
    SpaceTooLarge(u128),
    #[error(transparent)]
    NotFinite(#[from] NotFinite),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// How the per-state work is scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// Data-parallel over states. Same as `Sequential` without the
    /// `parallel` feature.
    #[default]
    Parallel,
    Sequential,
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub states: Vec<Model>,
    pub viable: Vec<bool>,
    pub initial: Vec<bool>,
    /// Elimination rounds until the fixpoint was reached.
    pub rounds: usize,
}

impl OracleResult {
    /// Some initial state is viable.
    pub fn realizable(&self) -> bool {
        self.viable.iter().zip(&self.initial).any(|(v, i)| *v && *i)
    }

    pub fn verdict(&self) -> &'static str {
        if self.realizable() {
            "realizable"
        } else {
            "unrealizable"
        }
    }

    pub fn viable_states(&self) -> impl Iterator<Item = &Model> {
        self.states.iter().zip(&self.viable).filter(|(_, v)| **v).map(|(s, _)| s)
    }
}

/// All points of the product of the variables' domains, first variable
/// slowest.
pub fn enumerate(vars: &[Var], domains: &FiniteDomains) -> Vec<Model> {
    let mut out = vec![Model::new()];
    for v in vars {
        let dom = domains.of(v);
        out = out
            .into_iter()
            .flat_map(|m| dom.iter().map(move |x| m.clone().with(v, x.clone())))
            .collect();
    }
    out
}

fn fix(m: &Model) -> Subst {
    m.iter()
        .map(|(v, x)| {
            let a = match x {
                Value::Bool(b) => Assign::Bool(if *b { Formula::True } else { Formula::False }),
                Value::Num(r) => Assign::Num(Term::constant(r.clone())),
            };
            (v.clone(), a)
        })
        .collect()
}

fn map_states<T, F>(mode: Mode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode == Mode::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Successors of one state: for each admissible input, the indices of the
/// states `G_T` allows next.
type Moves = Vec<Vec<usize>>;

fn moves(ts: &TransitionSystem, s: &Model, inputs: &[Model], next_states: &[Model]) -> Result<Moves, LogicError> {
    let a = simplify(&substitute(&ts.assumptions, &fix(s))?);
    let t = simplify(&substitute(&ts.trans, &fix(s))?);
    let mut out = Vec::new();
    for i in inputs {
        if !eval(&a, i)? {
            continue;
        }
        let ti = simplify(&substitute(&t, &fix(i))?);
        let mut succ = Vec::new();
        for (k, n) in next_states.iter().enumerate() {
            if eval(&ti, n)? {
                succ.push(k);
            }
        }
        out.push(succ);
    }
    Ok(out)
}

/// Greatest fixpoint of viable states by explicit enumeration.
pub fn oracle_viable(ts: &TransitionSystem, domains: &FiniteDomains, mode: Mode) -> Result<OracleResult, OracleError> {
    let space = domains.size(&ts.state).saturating_mul(domains.size(&ts.inputs));
    if space > MAX_SPACE {
        return Err(OracleError::SpaceTooLarge(space));
    }
    let states = enumerate(&ts.state, domains);
    let inputs = enumerate(&ts.inputs, domains);
    // the same states over the primed names, for reading G_T
    let next_states: Vec<Model> = states
        .iter()
        .map(|m| ts.state.iter().zip(&ts.next).map(|(v, p)| (p.clone(), m.get(v).expect("total").clone())).collect())
        .collect();
    let table: Vec<Result<Moves, LogicError>> =
        map_states(mode, states.len(), |k| moves(ts, &states[k], &inputs, &next_states));
    let table: Vec<Moves> = table.into_iter().collect::<Result<_, _>>()?;
    let initial = map_states(mode, states.len(), |k| eval(&ts.init, &states[k]))
        .into_iter()
        .collect::<Result<Vec<bool>, _>>()?;
    let mut viable = vec![true; states.len()];
    let mut rounds = 0;
    loop {
        rounds += 1;
        let next: Vec<bool> = map_states(mode, states.len(), |k| {
            viable[k] && table[k].iter().all(|succ| succ.iter().any(|j| viable[*j]))
        });
        if next == viable {
            break;
        }
        viable = next;
    }
    Ok(OracleResult { states, viable, initial, rounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::bounded_domains;

    #[test]
    fn toggle_is_viable_everywhere() {
        let b = Var::bool("b");
        let i = Var::bool("i");
        let trans = Formula::iff(Formula::var(&b.primed()), Formula::not(Formula::var(&b)));
        let ts = TransitionSystem::new("toggle", vec![b], vec![i], Formula::True, Formula::True, trans).unwrap();
        let d = bounded_domains(&ts).unwrap();
        for mode in [Mode::Parallel, Mode::Sequential] {
            let r = oracle_viable(&ts, &d, mode).unwrap();
            assert_eq!(r.viable, vec![true, true]);
            assert!(r.realizable());
        }
    }
}
