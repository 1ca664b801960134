//! The realizability loop: refine the candidate set of viable states until
//! the ∀∃ check succeeds or no initial state survives.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::aeval::{self, AeError, AeQuery, AeResult, Budget, SkolemFunction};
use crate::encode::TransitionSystem;
use crate::logic::{eval, simplify, substitute, Formula, LogicError, Model};
use crate::smt::{SatResult, SmtError, Solver, Validity};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Smt(#[from] SmtError),
    #[error(transparent)]
    Ae(#[from] AeError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("refinement {iteration} does not remove any state")]
    NoProgress { iteration: usize },
    #[error("refinement {iteration} is not monotone")]
    NotMonotone { iteration: usize },
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub max_iterations: usize,
    pub time_budget: Duration,
    pub budget: Budget,
    /// Check `F_k ∧ ¬F_{k+1}` for satisfiability after every refinement.
    pub check_progress: bool,
    /// Check `F_{k+1} ⇒ F_k` after every refinement.
    pub check_monotone: bool,
    /// Prune entailed blocks of F beyond this many.
    pub prune_above: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_iterations: 200,
            time_budget: Duration::from_secs(600),
            budget: Budget::default(),
            check_progress: true,
            check_monotone: cfg!(debug_assertions),
            prune_above: 16,
        }
    }
}

/// One line of the engine trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub phi_verdict: String,
    pub region_disjuncts: usize,
    pub w_disjuncts: Option<usize>,
    #[serde(rename = "F_size")]
    pub f_size: usize,
    pub elapsed_ms: u128,
    /// Outcome of the progress check for this refinement, when run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub progress: Option<bool>,
}

/// `(Q, W)` of one refinement.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub q: Formula,
    pub w: Formula,
}

#[derive(Clone, Debug)]
pub enum SynthesisOutcome {
    Realizable { initial: Model, skolem: SkolemFunction, fixpoint: Formula },
    Unrealizable { fixpoint: Formula, last_region: Option<Formula> },
    Unknown { reason: String },
}

impl SynthesisOutcome {
    pub fn verdict(&self) -> &'static str {
        match self {
            SynthesisOutcome::Realizable { .. } => "realizable",
            SynthesisOutcome::Unrealizable { .. } => "unrealizable",
            SynthesisOutcome::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisRun {
    pub outcome: SynthesisOutcome,
    pub iterations: usize,
    /// `F_0, F_1, …` in order.
    pub fixpoints: Vec<Formula>,
    pub history: Vec<Refinement>,
    pub trace: Vec<IterationRecord>,
    pub elapsed: Duration,
    /// Skolem functions of every Valid ∀∃ call, with their queries.
    pub valid_queries: Vec<(AeQuery, SkolemFunction)>,
}

impl SynthesisRun {
    /// The progress check passed for every refinement that ran it.
    pub fn progress_held(&self) -> bool {
        self.trace.iter().all(|r| r.progress != Some(false))
    }
}

/// The candidate set F as a conjunction of blocks `¬W_k`.
struct Candidate {
    blocks: Vec<Formula>,
}

impl Candidate {
    fn formula(&self) -> Formula {
        Formula::and(self.blocks.iter().cloned())
    }

    /// Drop blocks implied by the others.
    fn prune(&mut self, solver: &mut Solver, ts: &TransitionSystem) -> Result<(), EngineError> {
        let mut j = self.blocks.len();
        while j > 0 {
            j -= 1;
            let others = Formula::and(
                self.blocks.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, b)| b.clone()),
            );
            let q = Formula::implies(others, self.blocks[j].clone());
            if solver.check_valid(&q, &ts.state)? == Validity::Valid {
                self.blocks.remove(j);
            }
        }
        Ok(())
    }
}

pub fn synthesize(solver: &mut Solver, ts: &TransitionSystem, cfg: &EngineConfig) -> Result<SynthesisRun, EngineError> {
    ts.check_scopes()?;
    let start = Instant::now();
    solver.set_deadline(Some(start + cfg.time_budget));
    let result = run(solver, ts, cfg, start);
    solver.set_deadline(None);
    result
}

fn run(solver: &mut Solver, ts: &TransitionSystem, cfg: &EngineConfig, start: Instant) -> Result<SynthesisRun, EngineError> {
    let mut f = Candidate { blocks: Vec::new() };
    let mut out = SynthesisRun {
        outcome: SynthesisOutcome::Unknown { reason: String::new() },
        iterations: 0,
        fixpoints: vec![Formula::True],
        history: Vec::new(),
        trace: Vec::new(),
        elapsed: Duration::ZERO,
        valid_queries: Vec::new(),
    };
    let xs = ts.state_and_inputs();
    let prime = ts.prime();
    let finish = |mut out: SynthesisRun, outcome: SynthesisOutcome| {
        out.outcome = outcome;
        out.elapsed = start.elapsed();
        Ok(out)
    };
    loop {
        if out.iterations >= cfg.max_iterations {
            let reason = format!("iteration cap {} reached", cfg.max_iterations);
            return finish(out, SynthesisOutcome::Unknown { reason });
        }
        if solver.deadline_passed() {
            let reason = format!("time budget of {:?} exhausted", cfg.time_budget);
            return finish(out, SynthesisOutcome::Unknown { reason });
        }
        out.iterations += 1;
        let k = out.iterations;
        let fk = f.formula();
        let s = Formula::and([fk.clone(), ts.assumptions.clone()]);
        let t = Formula::and([ts.trans.clone(), substitute(&fk, &prime)?]);
        let phi = AeQuery::new(xs.clone(), ts.next.clone(), s, t)?;
        let result = aeval::solve(solver, &phi, cfg.budget)?;
        let mut record = IterationRecord {
            iteration: k,
            phi_verdict: result.verdict().to_string(),
            region_disjuncts: result.region().len(),
            w_disjuncts: None,
            f_size: fk.size(),
            elapsed_ms: start.elapsed().as_millis(),
            progress: None,
        };
        log::debug!("iteration {k}: phi {} with {} disjuncts", record.phi_verdict, record.region_disjuncts);
        match result {
            AeResult::Unknown { reason, .. } => {
                out.trace.push(record);
                return finish(out, SynthesisOutcome::Unknown { reason: format!("phi: {reason}") });
            }
            AeResult::Valid { skolem, .. } => {
                out.trace.push(record);
                out.valid_queries.push((phi, skolem.clone()));
                let init = Formula::and([ts.init.clone(), fk.clone()]);
                let outcome = match solver.check_sat(&init, &ts.state)? {
                    SatResult::Sat(m) => SynthesisOutcome::Realizable { initial: m, skolem, fixpoint: fk },
                    SatResult::Unsat => SynthesisOutcome::Unrealizable {
                        fixpoint: fk,
                        last_region: out.history.last().map(|r| r.w.clone()),
                    },
                    SatResult::Unknown(reason) => SynthesisOutcome::Unknown { reason: format!("init: {reason}") },
                };
                return finish(out, outcome);
            }
            AeResult::Invalid { region, .. } => {
                // Under S' = F, `A ∧ ¬Q` and `A ∧ ¬⋁P` agree; the latter
                // keeps F out of the query.
                let q = region.closed_form();
                let t2 = Formula::and([ts.assumptions.clone(), Formula::not(region.union())]);
                let phi2 = AeQuery::new(ts.state.clone(), ts.inputs.clone(), fk.clone(), t2)?;
                let result2 = aeval::solve(solver, &phi2, cfg.budget)?;
                record.w_disjuncts = Some(result2.region().len());
                if let AeResult::Unknown { reason, .. } = &result2 {
                    out.trace.push(record);
                    return finish(out, SynthesisOutcome::Unknown { reason: format!("violating region: {reason}") });
                }
                if let AeResult::Valid { skolem, .. } = &result2 {
                    out.valid_queries.push((phi2.clone(), skolem.clone()));
                }
                // F ∧ ¬W = F ∧ ¬⋁P, so the block need not repeat F.
                let w = result2.region().closed_form();
                let block = simplify(&Formula::not(result2.region().union()));
                f.blocks.push(block);
                if f.blocks.len() > cfg.prune_above {
                    f.prune(solver, ts)?;
                }
                let next = f.formula();
                if cfg.check_progress {
                    let removed = Formula::and([fk.clone(), Formula::not(next.clone())]);
                    record.progress = match solver.check_sat(&removed, &ts.state)? {
                        SatResult::Sat(_) => Some(true),
                        SatResult::Unsat => Some(false),
                        SatResult::Unknown(_) => None,
                    };
                }
                if cfg.check_monotone {
                    let mono = Formula::implies(next.clone(), fk.clone());
                    if let Validity::CounterModel(_) = solver.check_valid(&mono, &ts.state)? {
                        return Err(EngineError::NotMonotone { iteration: k });
                    }
                }
                let stalled = record.progress == Some(false);
                out.trace.push(record);
                out.history.push(Refinement { q, w });
                out.fixpoints.push(next);
                if stalled {
                    return Err(EngineError::NoProgress { iteration: k });
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ObligationVerdict {
    Valid,
    Failed(String),
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obligation {
    pub name: String,
    pub verdict: ObligationVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificationReport {
    pub obligations: Vec<Obligation>,
}

impl CertificationReport {
    pub fn certified(&self) -> bool {
        self.obligations.iter().all(|o| o.verdict == ObligationVerdict::Valid)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Obligation> {
        self.obligations.iter().filter(|o| o.verdict != ObligationVerdict::Valid)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertifyError {
    #[error("certification failed: {}", .0.join("; "))]
    CertificationFailed(Vec<String>),
    #[error("only realizable outcomes can be certified")]
    NotRealizable,
    #[error(transparent)]
    Smt(#[from] SmtError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// Re-check a realizable outcome independently of how it was found.
pub fn certify(solver: &mut Solver, ts: &TransitionSystem, outcome: &SynthesisOutcome) -> Result<CertificationReport, CertifyError> {
    let SynthesisOutcome::Realizable { initial, skolem, fixpoint } = outcome else {
        return Err(CertifyError::NotRealizable);
    };
    let xs = ts.state_and_inputs();
    let goal = Formula::and([ts.trans.clone(), substitute(fixpoint, &ts.prime())?]);
    let mut obligations = Vec::new();
    for (k, case) in skolem.cases.iter().enumerate() {
        let premise = Formula::and([fixpoint.clone(), ts.assumptions.clone(), case.guard.clone()]);
        let missing: Vec<String> =
            ts.next.iter().filter(|v| !case.assigns.contains_key(v)).map(|v| v.to_string()).collect();
        let verdict = if !missing.is_empty() {
            ObligationVerdict::Failed(format!("no assignment for {}", missing.join(", ")))
        } else {
            let instantiated = substitute(&goal, &case.assigns)?;
            match solver.check_valid(&Formula::implies(premise, instantiated), &xs)? {
                Validity::Valid => ObligationVerdict::Valid,
                Validity::CounterModel(m) => ObligationVerdict::Failed(format!("countermodel {m}")),
                Validity::Unknown(r) => ObligationVerdict::Unknown(r),
            }
        };
        obligations.push(Obligation { name: format!("case {k}: F ∧ A ∧ guard ⇒ G_T ∧ F'"), verdict });
    }
    let coverage = Formula::implies(
        Formula::and([fixpoint.clone(), ts.assumptions.clone()]),
        Formula::or(skolem.cases.iter().map(|c| c.guard.clone())),
    );
    let verdict = match solver.check_valid(&coverage, &xs)? {
        Validity::Valid => ObligationVerdict::Valid,
        Validity::CounterModel(m) => ObligationVerdict::Failed(format!("uncovered {m}")),
        Validity::Unknown(r) => ObligationVerdict::Unknown(r),
    };
    obligations.push(Obligation { name: "guards cover F ∧ A".into(), verdict });
    for (name, f) in [("G_I(initial)", &ts.init), ("F(initial)", fixpoint)] {
        let verdict = match eval(f, initial) {
            Ok(true) => ObligationVerdict::Valid,
            Ok(false) => ObligationVerdict::Failed(format!("false at {initial}")),
            Err(e) => ObligationVerdict::Failed(e.to_string()),
        };
        obligations.push(Obligation { name: name.into(), verdict });
    }
    let report = CertificationReport { obligations };
    if report.certified() {
        Ok(report)
    } else {
        Err(CertifyError::CertificationFailed(report.failures().map(|o| format!("{}: {:?}", o.name, o.verdict)).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Term, Var};

    fn solver() -> Solver {
        Solver::from_env().expect("solver available")
    }

    #[test]
    fn trivial_system_is_realizable_with_true_fixpoint() {
        let x = Var::int("x");
        let ts = TransitionSystem::new("t", vec![x], vec![], Formula::True, Formula::True, Formula::True).unwrap();
        let mut s = solver();
        let run = synthesize(&mut s, &ts, &EngineConfig::default()).unwrap();
        let SynthesisOutcome::Realizable { fixpoint, .. } = &run.outcome else { panic!("{:?}", run.outcome) };
        assert_eq!(*fixpoint, Formula::True);
        assert!(certify(&mut s, &ts, &run.outcome).unwrap().certified());
    }

    #[test]
    fn empty_initial_set_is_unrealizable() {
        let x = Var::int("x");
        let ts = TransitionSystem::new("t", vec![x], vec![], Formula::True, Formula::False, Formula::True).unwrap();
        let run = synthesize(&mut solver(), &ts, &EngineConfig::default()).unwrap();
        assert!(matches!(run.outcome, SynthesisOutcome::Unrealizable { .. }));
        assert_eq!(run.iterations, 1);
    }

    #[test]
    fn closed_system_with_dead_states() {
        // x' = x + 1 within [0, 3]: every state eventually dies
        let x = Var::int("x");
        let trans = Formula::and([
            Formula::ge(Term::var(&x), Term::int(0)),
            Formula::eq(Term::var(&x.primed()), Term::sum([Term::var(&x), Term::int(1)])),
            Formula::le(Term::var(&x.primed()), Term::int(3)),
        ]);
        let init = Formula::eq(Term::var(&x), Term::int(0));
        let ts = TransitionSystem::new("t", vec![x], vec![], Formula::True, init, trans).unwrap();
        let run = synthesize(&mut solver(), &ts, &EngineConfig::default()).unwrap();
        assert!(matches!(run.outcome, SynthesisOutcome::Unrealizable { .. }), "{:?}", run.outcome);
        assert!(run.progress_held());
    }
}
