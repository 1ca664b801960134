//! External SMT solver driven over the SMT-LIB 2 text protocol.
//!
//! One process per [`Solver`]; every query runs inside `push`/`pop`, so a
//! crashed or timed-out process can be replaced without replaying history.
//! Every `sat` answer is re-checked with [`crate::logic::eval`] before it is
//! returned.

mod process;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::logic::smtlib::{formula_to_smt, parse_sexp, parse_value, symbol, Sexp};
use crate::logic::{eval, Formula, LogicError, Model, Sort, Value, Var};
use process::{Process, Reply};

pub const SOLVER_ENV: &str = "REACSYNTH_SOLVER";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmtError {
    #[error("cannot start solver: {0}")]
    Spawn(String),
    #[error("solver crashed: {0}")]
    Crashed(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
    Unknown(String),
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
    pub fn is_unsat(&self) -> bool {
        matches!(self, SatResult::Unsat)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    CounterModel(Model),
    Unknown(String),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub path: PathBuf,
    pub args: Vec<String>,
    /// Directory receiving each query as a numbered `.smt2` file.
    pub query_log: Option<PathBuf>,
    /// Hard limit for a single query; the process is killed past it.
    pub query_timeout: Duration,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        SolverConfig {
            path: path.into(),
            args: vec!["-in".into(), "-smt2".into()],
            query_log: None,
            query_timeout: Duration::from_secs(120),
            seed: 0,
        }
    }

    /// `$REACSYNTH_SOLVER`, else `z3` from `PATH`.
    pub fn from_env() -> Result<Self, SmtError> {
        if let Ok(p) = std::env::var(SOLVER_ENV) {
            if !p.is_empty() {
                return Ok(SolverConfig::new(p));
            }
        }
        find_in_path("z3")
            .map(SolverConfig::new)
            .ok_or_else(|| SmtError::Spawn(format!("no solver: set {SOLVER_ENV} or put z3 on PATH")))
    }

    /// Split a whitespace-separated argument template.
    pub fn with_args(mut self, args: &str) -> Self {
        self.args = args.split_whitespace().map(String::from).collect();
        self
    }
}

fn find_in_path(bin: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|d| d.join(bin)).find(|p| p.is_file())
}

#[derive(Clone, Debug, Default)]
pub struct SolverStats {
    pub queries: u64,
    pub sat: u64,
    pub unsat: u64,
    pub unknown: u64,
    pub restarts: u64,
    pub time: Duration,
}

pub struct Solver {
    cfg: SolverConfig,
    proc: Option<Process>,
    deadline: Option<Instant>,
    stats: SolverStats,
}

const MODEL_RETRIES: usize = 1;

impl Solver {
    pub fn new(cfg: SolverConfig) -> Result<Solver, SmtError> {
        if let Some(dir) = &cfg.query_log {
            std::fs::create_dir_all(dir).map_err(|e| SmtError::Spawn(format!("query log: {e}")))?;
        }
        let mut s = Solver { cfg, proc: None, deadline: None, stats: SolverStats::default() };
        s.ensure_running()?;
        Ok(s)
    }

    pub fn from_env() -> Result<Solver, SmtError> {
        Solver::new(SolverConfig::from_env()?)
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    /// Queries issued after `deadline` return `Unknown` immediately.
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn deadline_passed(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn prelude(&self) -> String {
        format!(
            "(set-option :print-success false)\n(set-option :produce-models true)\n(set-option :random-seed {})\n(set-logic ALL)\n",
            self.cfg.seed
        )
    }

    fn ensure_running(&mut self) -> Result<(), SmtError> {
        if self.proc.is_none() {
            let mut p = Process::spawn(&self.cfg.path, &self.cfg.args)?;
            p.send(&self.prelude())?;
            self.proc = Some(p);
        }
        Ok(())
    }

    fn restart(&mut self) {
        if let Some(mut p) = self.proc.take() {
            p.kill();
        }
        self.stats.restarts += 1;
    }

    /// Satisfiability of `f` over `scope`. Sat models are total over the
    /// scope and have been checked against `f`.
    pub fn check_sat(&mut self, f: &Formula, scope: &[Var]) -> Result<SatResult, SmtError> {
        let mut vars: BTreeSet<Var> = scope.iter().cloned().collect();
        let free = f.free_vars();
        if let Some(v) = free.iter().find(|v| !vars.contains(v)) {
            return Err(LogicError::UnboundVariable(v.name().to_string()).into());
        }
        vars.extend(free);
        let vars: Vec<Var> = vars.into_iter().collect();
        let started = Instant::now();
        let res = self.check_inner(f, &vars);
        self.stats.time += started.elapsed();
        self.stats.queries += 1;
        match &res {
            Ok(SatResult::Sat(_)) => self.stats.sat += 1,
            Ok(SatResult::Unsat) => self.stats.unsat += 1,
            _ => self.stats.unknown += 1,
        }
        res
    }

    fn check_inner(&mut self, f: &Formula, vars: &[Var]) -> Result<SatResult, SmtError> {
        if self.deadline_passed() {
            return Ok(SatResult::Unknown("budget exhausted".into()));
        }
        let query = render_query(f, vars);
        if let Some(dir) = &self.cfg.query_log {
            let path = dir.join(format!("{:06}.smt2", self.stats.queries));
            let text = format!("{}{}(get-model)\n(exit)\n", self.prelude(), query);
            let _ = std::fs::write(path, text);
        }
        for attempt in 0..=MODEL_RETRIES {
            match self.run_query(&query, vars)? {
                SatResult::Sat(m) => {
                    if eval(f, &m)? {
                        return Ok(SatResult::Sat(m));
                    }
                    log::warn!("solver model failed validation (attempt {attempt})");
                    self.restart();
                }
                other => return Ok(other),
            }
        }
        Ok(SatResult::Unknown("solver model failed validation".into()))
    }

    fn query_deadline(&self) -> Instant {
        let d = Instant::now() + self.cfg.query_timeout;
        match self.deadline {
            Some(b) if b < d => b,
            _ => d,
        }
    }

    fn run_query(&mut self, query: &str, vars: &[Var]) -> Result<SatResult, SmtError> {
        let mut crashes = 0;
        loop {
            self.ensure_running()?;
            let deadline = self.query_deadline();
            match self.exchange(query, vars, deadline) {
                Ok(r) => return Ok(r),
                Err(Failure::Timeout) => {
                    self.restart();
                    return Ok(SatResult::Unknown("timeout".into()));
                }
                Err(Failure::Crash(msg)) => {
                    self.restart();
                    crashes += 1;
                    if crashes > 1 {
                        return Ok(SatResult::Unknown(format!("solver crashed: {msg}")));
                    }
                }
                Err(Failure::Unknown(msg)) => {
                    // The stream may hold further replies; resynchronize.
                    self.restart();
                    return Ok(SatResult::Unknown(msg));
                }
            }
        }
    }

    fn exchange(&mut self, query: &str, vars: &[Var], deadline: Instant) -> Result<SatResult, Failure> {
        let p = self.proc.as_mut().expect("running solver");
        p.send(query).map_err(|e| Failure::Crash(e.to_string()))?;
        let answer = match p.read_response(deadline) {
            Reply::Line(l) => l,
            Reply::Timeout => return Err(Failure::Timeout),
            Reply::Closed => return Err(Failure::Crash("output closed".into())),
        };
        let result = match answer.as_str() {
            "unsat" => SatResult::Unsat,
            "unknown" => {
                p.send("(get-info :reason-unknown)\n").map_err(|e| Failure::Crash(e.to_string()))?;
                let reason = match p.read_response(deadline) {
                    Reply::Line(l) => l,
                    _ => return Err(Failure::Timeout),
                };
                SatResult::Unknown(reason)
            }
            "sat" => {
                if vars.is_empty() {
                    SatResult::Sat(Model::new())
                } else {
                    let mut req = String::from("(get-value (");
                    for (i, v) in vars.iter().enumerate() {
                        if i > 0 {
                            req.push(' ');
                        }
                        req.push_str(&symbol(v.name()));
                    }
                    req.push_str("))\n");
                    p.send(&req).map_err(|e| Failure::Crash(e.to_string()))?;
                    let values = match p.read_response(deadline) {
                        Reply::Line(l) => l,
                        Reply::Timeout => return Err(Failure::Timeout),
                        Reply::Closed => return Err(Failure::Crash("output closed".into())),
                    };
                    match parse_model(&values, vars) {
                        Some(m) => SatResult::Sat(m),
                        None => SatResult::Unknown(format!("unparseable model: {values}")),
                    }
                }
            }
            other if other.starts_with("(error") => {
                log::error!("solver error: {other}");
                return Err(Failure::Unknown(format!("solver error: {other}")));
            }
            other => return Err(Failure::Crash(format!("unexpected reply `{other}`"))),
        };
        p.send("(pop 1)\n").map_err(|e| Failure::Crash(e.to_string()))?;
        Ok(result)
    }

    /// `Valid` iff `!f` is unsatisfiable.
    pub fn check_valid(&mut self, f: &Formula, scope: &[Var]) -> Result<Validity, SmtError> {
        Ok(match self.check_sat(&Formula::not(f.clone()), scope)? {
            SatResult::Unsat => Validity::Valid,
            SatResult::Sat(m) => Validity::CounterModel(m),
            SatResult::Unknown(r) => Validity::Unknown(r),
        })
    }

    pub fn query_log(&self) -> Option<&Path> {
        self.cfg.query_log.as_deref()
    }
}

enum Failure {
    Timeout,
    Crash(String),
    Unknown(String),
}

/// Canonical query text: sorted declarations, one assertion.
pub fn render_query(f: &Formula, vars: &[Var]) -> String {
    let mut sorted: Vec<&Var> = vars.iter().collect();
    sorted.sort_by(|a, b| a.name().cmp(b.name()).then(a.sort().cmp(&b.sort())));
    let mut q = String::from("(push 1)\n");
    for v in sorted {
        let _ = writeln!(q, "(declare-const {} {})", symbol(v.name()), v.sort().smt_name());
    }
    let _ = writeln!(q, "(assert {})", formula_to_smt(f));
    q.push_str("(check-sat)\n");
    q
}

fn parse_model(text: &str, vars: &[Var]) -> Option<Model> {
    let sexp = parse_sexp(text).ok()?;
    let pairs = sexp.as_list()?;
    let mut m = Model::new();
    for pair in pairs {
        let [name, value] = pair.as_list()? else { return None };
        let name = name.as_atom()?;
        let var = vars.iter().find(|v| v.name() == name)?;
        let val = match var.sort() {
            Sort::Bool => match value {
                Sexp::Atom(a) if a == "true" => Value::Bool(true),
                Sexp::Atom(a) if a == "false" => Value::Bool(false),
                _ => return None,
            },
            Sort::Int | Sort::Real => Value::Num(parse_value(value)?),
        };
        if !m.try_insert(var.clone(), val) {
            return None;
        }
    }
    if vars.iter().all(|v| m.contains(v)) {
        Some(m)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{rat, Term};

    #[test]
    fn query_text_is_canonical() {
        let x = Var::real("x");
        let a = Var::int("a");
        let f = Formula::lt(Term::var(&x), Term::var(&a));
        let q1 = render_query(&f, &[x.clone(), a.clone()]);
        let q2 = render_query(&f, &[a, x]);
        assert_eq!(q1, q2);
        assert!(q1.find("declare-const a").unwrap() < q1.find("declare-const x").unwrap());
    }

    #[test]
    fn model_parsing() {
        let x = Var::real("x");
        let n = Var::int("n'");
        let b = Var::bool("b");
        let m = parse_model("((x (/ 1.0 2.0)) (|n'| (- 3)) (b true))", &[x.clone(), n.clone(), b.clone()]).unwrap();
        assert_eq!(m.num(&n), Some(&rat(-3)));
        assert_eq!(m.get(&b), Some(&Value::Bool(true)));
        assert!(parse_model("((x (root-obj x 1)))", std::slice::from_ref(&x)).is_none());
        // Incomplete models are rejected.
        assert!(parse_model("((x 1.0))", &[x, b]).is_none());
    }
}
