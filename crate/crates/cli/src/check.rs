//! `oracle-check` and `aeval`.

use std::path::Path;

use reacsynth_core::aeval::{solve, AeQuery, AeResult, Budget};
use reacsynth_core::encode::bounded_domains;
use reacsynth_core::engine::{synthesize, EngineConfig};
use reacsynth_core::logic::smtlib::{formula_to_smt, parse_formula, parse_sexps, scope_of, symbol, term_to_smt, Sexp};
use reacsynth_core::logic::{Assign, Sort, Var};
use reacsynth_core::oracle::{oracle_viable, Mode};
use reacsynth_core::smt::{Solver, SolverConfig};
use serde::Serialize;

use crate::synth::{load_contract, SynthOptions};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct OracleComparison {
    pub contract: String,
    pub engine: String,
    pub oracle: String,
    pub agree: bool,
    pub iterations: usize,
    pub states: usize,
    pub viable_states: usize,
}

impl OracleComparison {
    pub fn exit_code(&self) -> i32 {
        if self.agree {
            0
        } else {
            2
        }
    }
}

pub fn oracle_check(path: &Path, opts: &SynthOptions) -> Result<OracleComparison, CliError> {
    let ts = load_contract(path)?;
    let domains = bounded_domains(&ts).map_err(|e| CliError::Oracle(e.to_string()))?;
    let oracle = oracle_viable(&ts, &domains, Mode::default()).map_err(|e| CliError::Oracle(e.to_string()))?;
    let mut solver = Solver::new(opts.solver.clone())?;
    let cfg = EngineConfig { max_iterations: opts.max_iterations, time_budget: opts.timeout, ..EngineConfig::default() };
    let run = synthesize(&mut solver, &ts, &cfg)?;
    let engine = run.outcome.verdict().to_string();
    Ok(OracleComparison {
        contract: path.display().to_string(),
        agree: engine == oracle.verdict(),
        engine,
        oracle: oracle.verdict().to_string(),
        iterations: run.iterations,
        states: oracle.states.len(),
        viable_states: oracle.viable_states().count(),
    })
}

fn sort_of(s: &Sexp) -> Result<Sort, CliError> {
    match s.as_atom() {
        Some("Bool") => Ok(Sort::Bool),
        Some("Int") => Ok(Sort::Int),
        Some("Real") => Ok(Sort::Real),
        _ => Err(CliError::Query(format!("unknown sort {s}"))),
    }
}

/// `(define-fun NAME ((v Sort) ...) Bool BODY)` → (params, body).
fn define_fun(s: &Sexp) -> Option<(&str, &[Sexp], &Sexp)> {
    let l = s.as_list()?;
    match l {
        [kw, name, params, ret, body] if kw.as_atom() == Some("define-fun") && ret.as_atom() == Some("Bool") => {
            Some((name.as_atom()?, params.as_list()?, body))
        }
        _ => None,
    }
}

/// A query file holds `define-fun`s named `S` and `T`. The parameters of
/// `S` are the universal variables; those of `T` not shared with `S` are
/// the existential ones.
pub fn parse_query(text: &str) -> Result<AeQuery, CliError> {
    let q = |m: String| CliError::Query(m);
    let mut s_def = None;
    let mut t_def = None;
    for e in parse_sexps(text).map_err(|e| q(e.to_string()))? {
        match define_fun(&e) {
            Some(("S", p, b)) => s_def = Some((p.to_vec(), b.clone())),
            Some(("T", p, b)) => t_def = Some((p.to_vec(), b.clone())),
            _ => return Err(q(format!("expected (define-fun S|T (...) Bool ...), got {e}"))),
        }
    }
    let (s_params, s_body) = s_def.ok_or_else(|| q("no definition of S".into()))?;
    let (t_params, t_body) = t_def.ok_or_else(|| q("no definition of T".into()))?;
    let params = |ps: &[Sexp]| -> Result<Vec<Var>, CliError> {
        ps.iter()
            .map(|p| match p.as_list() {
                Some([n, s]) => Ok(Var::new(n.as_atom().ok_or_else(|| q(format!("bad parameter {p}")))?, sort_of(s)?)),
                _ => Err(q(format!("bad parameter {p}"))),
            })
            .collect()
    };
    let xs = params(&s_params)?;
    let all = params(&t_params)?;
    if let Some(v) = all.iter().find(|v| xs.iter().any(|x| x.name() == v.name() && x.sort() != v.sort())) {
        return Err(q(format!("{} is declared with two sorts", v.name())));
    }
    let ys: Vec<Var> = all.iter().filter(|v| !xs.contains(v)).cloned().collect();
    let s = parse_formula(&s_body, &scope_of(&xs)).map_err(|e| q(format!("S: {e}")))?;
    let t = parse_formula(&t_body, &scope_of(xs.iter().chain(&ys))).map_err(|e| q(format!("T: {e}")))?;
    AeQuery::new(xs, ys, s, t).map_err(|e| q(e.to_string()))
}

fn signature(vs: &[Var]) -> String {
    vs.iter().map(|v| format!("({} {})", symbol(v.name()), v.sort().smt_name())).collect::<Vec<_>>().join(" ")
}

fn define(name: &str, params: &[Var], sort: Sort, body: &str) -> String {
    format!("(define-fun {} ({}) {} {})", symbol(name), signature(params), sort.smt_name(), body)
}

/// Answer a query file; the text printed and the exit code.
pub fn aeval_file(path: &Path, solver: SolverConfig) -> Result<(String, i32), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Read(path.display().to_string(), e.to_string()))?;
    let query = parse_query(&text)?;
    let mut solver = Solver::new(solver)?;
    let result = solve(&mut solver, &query, Budget::default()).map_err(|e| CliError::Query(e.to_string()))?;
    let mut out = vec![format!("; {}", result.verdict())];
    let region = result.region();
    out.push(format!("; region of validity: {} disjunct(s)", region.len()));
    out.push(define("region", &query.xs, Sort::Bool, &formula_to_smt(&region.closed_form())));
    let code = match &result {
        AeResult::Valid { skolem, .. } => {
            for (y, a) in skolem.as_ite() {
                let body = match &a {
                    Assign::Num(t) => term_to_smt(t, y.sort() == Sort::Real),
                    Assign::Bool(f) => formula_to_smt(f),
                };
                out.push(define(y.name(), &query.xs, y.sort(), &body));
            }
            0
        }
        AeResult::Invalid { counterexample, .. } => {
            out.push(format!("; counterexample: {counterexample}"));
            10
        }
        AeResult::Unknown { reason, .. } => {
            out.push(format!("; reason: {reason}"));
            20
        }
    };
    Ok((out.join("\n") + "\n", code))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_parameters_split_into_universal_and_existential() {
        let q = parse_query(
            "(define-fun S ((x Real)) Bool (>= x 0.0))\n(define-fun T ((x Real) (y Real)) Bool (> y x))",
        )
        .unwrap();
        assert_eq!(q.xs, vec![Var::real("x")]);
        assert_eq!(q.ys, vec![Var::real("y")]);
    }

    #[test]
    fn query_without_t_is_rejected() {
        assert!(matches!(parse_query("(define-fun S () Bool true)"), Err(CliError::Query(_))));
        assert!(matches!(parse_query("(assert true)"), Err(CliError::Query(_))));
    }
}
