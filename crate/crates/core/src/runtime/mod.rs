//! Executable controllers built from a realizable outcome.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::aeval::{SkolemCase, SkolemFunction};
use crate::encode::TransitionSystem;
use crate::engine::SynthesisOutcome;
use crate::logic::smtlib::{formula_to_smt, parse_formula_str, parse_term_str, scope_of, term_to_smt};
use crate::logic::{parse_rational, Assign, LogicError, Model, Sort, Value, Var};
use crate::smt::SmtError;

mod emit;
mod simulate;

pub use emit::{compile_harness, contract_hash, emit_c, loc, script, NumMode, STRICT_FLAGS};
pub use simulate::{sample_input, simulate, SimReport, TraceStep};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("no controller case matches state {0}")]
    NoCaseMatched(String),
    #[error("the assumptions admit no input at state {0}")]
    NoAdmissibleInput(String),
    #[error("only realizable outcomes yield a controller")]
    NotRealizable,
    #[error("controller does not assign `{0}`")]
    MissingAssignment(String),
    #[error("malformed controller: {0}")]
    Malformed(String),
    #[error("constant {0} does not fit in 64 bits")]
    ConstantTooLarge(String),
    #[error("solver gave up: {0}")]
    SolverUnknown(String),
    #[error(transparent)]
    Smt(#[from] SmtError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// Initial state plus first-match guarded updates of the state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Controller {
    pub name: String,
    pub state: Vec<Var>,
    pub inputs: Vec<Var>,
    pub initial: Model,
    /// Guards over state and inputs; assignments keyed by the state
    /// variable they update.
    pub cases: Vec<SkolemCase>,
}

impl Controller {
    pub fn from_outcome(ts: &TransitionSystem, outcome: &SynthesisOutcome) -> Result<Controller, RuntimeError> {
        let SynthesisOutcome::Realizable { initial, skolem, .. } = outcome else {
            return Err(RuntimeError::NotRealizable);
        };
        let unprimed: BTreeMap<&Var, &Var> = ts.next.iter().zip(&ts.state).collect();
        let mut cases = Vec::with_capacity(skolem.cases.len());
        for c in &skolem.cases {
            let mut assigns = BTreeMap::new();
            for (y, a) in &c.assigns {
                let x = unprimed.get(y).ok_or_else(|| RuntimeError::Malformed(format!("{y} is not a next-state variable")))?;
                assigns.insert((*x).clone(), a.clone());
            }
            if let Some(x) = ts.state.iter().find(|x| !assigns.contains_key(*x)) {
                return Err(RuntimeError::MissingAssignment(x.name().to_string()));
            }
            cases.push(SkolemCase { guard: c.guard.clone(), assigns });
        }
        Ok(Controller {
            name: ts.name.clone(),
            state: ts.state.clone(),
            inputs: ts.inputs.clone(),
            initial: initial.restrict(&ts.state),
            cases,
        })
    }

    /// The update as a Skolem function over the state variables.
    pub fn skolem(&self) -> SkolemFunction {
        SkolemFunction { cases: self.cases.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ControllerJson::from(self)).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Controller, RuntimeError> {
        let j: ControllerJson = serde_json::from_str(text).map_err(|e| RuntimeError::Malformed(e.to_string()))?;
        j.try_into()
    }
}

/// One step: `s' = f(s, i)`.
pub fn run_step(c: &Controller, s: &Model, i: &Model) -> Result<Model, RuntimeError> {
    let mut m = s.clone();
    m.extend(i);
    let stuck = || RuntimeError::NoCaseMatched(m.to_string());
    c.skolem().apply(&m).map_err(|_| stuck())
}

#[derive(Serialize, Deserialize)]
struct VarJson {
    name: String,
    sort: Sort,
}

#[derive(Serialize, Deserialize)]
struct CaseJson {
    guard: String,
    assigns: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ControllerJson {
    name: String,
    state_vars: Vec<VarJson>,
    input_vars: Vec<VarJson>,
    initial: BTreeMap<String, String>,
    cases: Vec<CaseJson>,
}

fn vars_json(vs: &[Var]) -> Vec<VarJson> {
    vs.iter().map(|v| VarJson { name: v.name().to_string(), sort: v.sort() }).collect()
}

impl From<&Controller> for ControllerJson {
    fn from(c: &Controller) -> Self {
        let cases = c
            .cases
            .iter()
            .map(|k| CaseJson {
                guard: formula_to_smt(&k.guard),
                assigns: k
                    .assigns
                    .iter()
                    .map(|(x, a)| {
                        let text = match a {
                            Assign::Num(t) => term_to_smt(t, x.sort() == Sort::Real),
                            Assign::Bool(f) => formula_to_smt(f),
                        };
                        (x.name().to_string(), text)
                    })
                    .collect(),
            })
            .collect();
        ControllerJson {
            name: c.name.clone(),
            state_vars: vars_json(&c.state),
            input_vars: vars_json(&c.inputs),
            initial: c.initial.iter().map(|(v, x)| (v.name().to_string(), x.to_string())).collect(),
            cases,
        }
    }
}

impl TryFrom<ControllerJson> for Controller {
    type Error = RuntimeError;

    fn try_from(j: ControllerJson) -> Result<Controller, RuntimeError> {
        let state: Vec<Var> = j.state_vars.iter().map(|v| Var::new(&v.name, v.sort)).collect();
        let inputs: Vec<Var> = j.input_vars.iter().map(|v| Var::new(&v.name, v.sort)).collect();
        let scope = scope_of(state.iter().chain(&inputs));
        let bad = |what: &str| RuntimeError::Malformed(what.to_string());
        let mut initial = Model::new();
        for v in &state {
            let text = j.initial.get(v.name()).ok_or_else(|| bad(&format!("no initial value for {v}")))?;
            let value = match v.sort() {
                Sort::Bool => Value::Bool(text.parse().map_err(|_| bad(text))?),
                _ => Value::Num(parse_rational(text).ok_or_else(|| bad(text))?),
            };
            if !initial.try_insert(v.clone(), value) {
                return Err(bad(&format!("initial value of {v} has the wrong sort")));
            }
        }
        let mut cases = Vec::new();
        for c in &j.cases {
            let guard = parse_formula_str(&c.guard, &scope)?;
            let mut assigns = BTreeMap::new();
            for (name, text) in &c.assigns {
                let x = scope.get(name).filter(|v| state.contains(v)).ok_or_else(|| bad(name))?;
                let a = match x.sort() {
                    Sort::Bool => Assign::Bool(parse_formula_str(text, &scope)?),
                    _ => Assign::Num(parse_term_str(text, &scope)?),
                };
                assigns.insert(x.clone(), a);
            }
            cases.push(SkolemCase { guard, assigns });
        }
        Ok(Controller { name: j.name, state, inputs, initial, cases })
    }
}
