//! Random admissible environments and closed-loop runs.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{run_step, Controller, RuntimeError};
use crate::encode::TransitionSystem;
use crate::gen;
use crate::logic::{eval, ratio, simplify, substitute, Assign, Formula, Model, Sort, Term, Value, Var};
use crate::smt::{SatResult, Solver};

fn fixed(m: &Model) -> Vec<(Var, Assign)> {
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

/// Denominators of the random thresholds; their lcm stays small so exact
/// runs do not blow up.
const DENOMS: [i64; 5] = [1, 2, 4, 5, 10];

fn side_constraint(rng: &mut impl Rng, v: &Var) -> Formula {
    match v.sort() {
        Sort::Bool => {
            let b = Formula::var(v);
            if rng.gen_bool(0.5) {
                b
            } else {
                Formula::not(b)
            }
        }
        sort => {
            let r = if sort == Sort::Int {
                ratio(rng.gen_range(-4..=4), 1)
            } else {
                let d = *DENOMS.choose(rng).expect("nonempty");
                ratio(rng.gen_range(-2 * d..=2 * d), d)
            };
            let (x, c) = (Term::var(v), Term::constant(r));
            if rng.gen_bool(0.5) {
                Formula::ge(x, c)
            } else {
                Formula::le(x, c)
            }
        }
    }
}

/// An input admitted by `A` at state `s`.
///
/// Random bounds on the inputs are tried first and dropped one at a time
/// while the query is unsatisfiable.
pub fn sample_input(
    solver: &mut Solver,
    a: &Formula,
    inputs: &[Var],
    s: &Model,
    rng: &mut impl Rng,
) -> Result<Model, RuntimeError> {
    let here = simplify(&substitute(a, &fixed(s).into_iter().collect())?);
    if inputs.is_empty() {
        return if eval(&here, &Model::new())? {
            Ok(Model::new())
        } else {
            Err(RuntimeError::NoAdmissibleInput(s.to_string()))
        };
    }
    let mut extra = Vec::new();
    for v in inputs {
        if rng.gen_bool(0.6) {
            extra.push(side_constraint(rng, v));
        }
    }
    loop {
        let q = Formula::and(std::iter::once(here.clone()).chain(extra.iter().cloned()));
        match solver.check_sat(&q, inputs)? {
            SatResult::Sat(m) => return Ok(m),
            SatResult::Unsat if extra.is_empty() => return Err(RuntimeError::NoAdmissibleInput(s.to_string())),
            SatResult::Unsat => {
                let k = rng.gen_range(0..extra.len());
                extra.swap_remove(k);
            }
            SatResult::Unknown(r) => return Err(RuntimeError::SolverUnknown(r)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    #[serde(serialize_with = "model_strings")]
    pub state: Model,
    #[serde(serialize_with = "model_strings")]
    pub input: Model,
    /// `G_T` and every property held on this step.
    pub guarantee: bool,
}

fn model_strings<S: serde::Serializer>(m: &Model, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(m.iter().map(|(v, x)| (v.name().to_string(), x.to_string())))
}

#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub steps: usize,
    /// Steps where `G_T` or a property failed.
    pub violations: usize,
    /// Visited states outside the fixpoint, when one was given.
    pub fixpoint_violations: usize,
    /// The run stopped early because no input was admissible.
    pub stalled: bool,
    #[serde(skip)]
    pub trace: Vec<TraceStep>,
}

/// Closed-loop run of `c` against inputs sampled from `A`, seeded.
pub fn simulate(
    solver: &mut Solver,
    ts: &TransitionSystem,
    c: &Controller,
    fixpoint: Option<&Formula>,
    steps: usize,
    seed: u64,
) -> Result<SimReport, RuntimeError> {
    let mut rng = gen::rng(seed);
    let mut s = c.initial.clone();
    let mut report = SimReport { steps: 0, violations: 0, fixpoint_violations: 0, stalled: false, trace: Vec::new() };
    let holds = |f: &Formula, m: &Model| eval(f, m).unwrap_or(false);
    if !holds(&ts.init, &s) {
        report.violations += 1;
    }
    for _ in 0..steps {
        if let Some(f) = fixpoint {
            if !holds(f, &s) {
                report.fixpoint_violations += 1;
            }
        }
        let i = match sample_input(solver, &ts.assumptions, &ts.inputs, &s, &mut rng) {
            Ok(i) => i,
            Err(RuntimeError::NoAdmissibleInput(_)) => {
                report.stalled = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let next = run_step(c, &s, &i)?;
        let mut full = s.clone();
        full.extend(&i);
        for (x, xp) in ts.state.iter().zip(&ts.next) {
            full.insert(xp.clone(), next.get(x).expect("total update").clone());
        }
        let ok = holds(&ts.trans, &full) && ts.properties.iter().all(|p| next.get(p) == Some(&Value::Bool(true)));
        if !ok {
            report.violations += 1;
        }
        report.trace.push(TraceStep { state: s, input: i, guarantee: ok });
        report.steps += 1;
        s = next;
    }
    Ok(report)
}
