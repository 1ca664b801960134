//! Validity of `∀x. S(x) ⇒ ∃y. T(x, y)` with regions of validity and
//! Skolem functions.

use std::collections::BTreeMap;

use crate::logic::{
    eval, eval_term, simplify, substitute, Assign, Formula, Model, Sort, Subst, Term, Value, Var,
};
use crate::mbp::{eliminate_all, project, MbpError};
use crate::smt::{SatResult, SmtError, Solver, Validity};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AeError {
    #[error("ill-formed query: {0}")]
    IllFormed(String),
    #[error(transparent)]
    Smt(#[from] SmtError),
    #[error(transparent)]
    Projection(#[from] MbpError),
}

#[derive(Clone, Debug)]
pub struct AeQuery {
    pub xs: Vec<Var>,
    pub ys: Vec<Var>,
    pub s: Formula,
    pub t: Formula,
}

impl AeQuery {
    pub fn new(xs: Vec<Var>, ys: Vec<Var>, s: Formula, t: Formula) -> Result<AeQuery, AeError> {
        let q = AeQuery { xs, ys, s, t };
        q.check()?;
        Ok(q)
    }

    fn check(&self) -> Result<(), AeError> {
        if let Some(v) = self.xs.iter().find(|v| self.ys.contains(v)) {
            return Err(AeError::IllFormed(format!("{v} is both universal and existential")));
        }
        if let Some(v) = self.s.free_vars().into_iter().find(|v| !self.xs.contains(v)) {
            return Err(AeError::IllFormed(format!("S mentions {v}, which is not universal")));
        }
        if let Some(v) =
            self.t.free_vars().into_iter().find(|v| !self.xs.contains(v) && !self.ys.contains(v))
        {
            return Err(AeError::IllFormed(format!("T mentions undeclared {v}")));
        }
        Ok(())
    }

    fn scope(&self) -> Vec<Var> {
        self.xs.iter().chain(&self.ys).cloned().collect()
    }
}

/// The disjuncts `P_i` found so far, each with the witnesses of its projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionOfValidity {
    s: Formula,
    disjuncts: Vec<Formula>,
    witnesses: Vec<Subst>,
}

impl RegionOfValidity {
    fn new(s: &Formula) -> Self {
        RegionOfValidity { s: s.clone(), disjuncts: Vec::new(), witnesses: Vec::new() }
    }

    /// A region built from bare disjuncts (no recorded witnesses).
    pub fn from_disjuncts(s: Formula, disjuncts: Vec<Formula>) -> Self {
        RegionOfValidity { s, disjuncts, witnesses: Vec::new() }
    }

    pub fn disjuncts(&self) -> &[Formula] {
        &self.disjuncts
    }

    pub fn len(&self) -> usize {
        self.disjuncts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disjuncts.is_empty()
    }

    /// `⋁ P_i`
    pub fn union(&self) -> Formula {
        Formula::or(self.disjuncts.iter().cloned())
    }

    /// `S ∧ ⋁ P_i`
    pub fn closed_form(&self) -> Formula {
        simplify(&Formula::and([self.s.clone(), self.union()]))
    }

    /// Witnesses recorded for disjunct `i`, if the region came from [`solve`].
    /// Exposed for audits; not part of the result proper.
    pub fn audit_witnesses(&self, i: usize) -> Option<&Subst> {
        self.witnesses.get(i)
    }

    /// The same region with disjunct `i` removed.
    pub fn without(&self, i: usize) -> RegionOfValidity {
        let mut r = self.clone();
        r.disjuncts.remove(i);
        if i < r.witnesses.len() {
            r.witnesses.remove(i);
        }
        r
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkolemCase {
    pub guard: Formula,
    pub assigns: Subst,
}

/// Guarded assignments with first-match semantics; the last guard is the
/// residue of the earlier ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkolemFunction {
    pub cases: Vec<SkolemCase>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no Skolem case matches the given valuation")]
pub struct NoCaseMatched;

impl SkolemFunction {
    fn from_region(region: &RegionOfValidity, ys: &[Var]) -> SkolemFunction {
        if region.is_empty() {
            let assigns = ys.iter().map(|y| (y.clone(), default_assign(y))).collect();
            return SkolemFunction { cases: vec![SkolemCase { guard: Formula::True, assigns }] };
        }
        let n = region.disjuncts.len();
        let mut cases = Vec::with_capacity(n);
        for (i, (p, w)) in region.disjuncts.iter().zip(&region.witnesses).enumerate() {
            let guard = if i + 1 == n {
                simplify(&Formula::not(Formula::or(region.disjuncts[..i].iter().cloned())))
            } else {
                p.clone()
            };
            cases.push(SkolemCase { guard, assigns: w.clone() });
        }
        SkolemFunction { cases }
    }

    pub fn case_for(&self, m: &Model) -> Result<usize, NoCaseMatched> {
        for (k, c) in self.cases.iter().enumerate() {
            if eval(&c.guard, m).map_err(|_| NoCaseMatched)? {
                return Ok(k);
            }
        }
        Err(NoCaseMatched)
    }

    /// Evaluate the assignments of the first matching case under `m`.
    pub fn apply(&self, m: &Model) -> Result<Model, NoCaseMatched> {
        let k = self.case_for(m)?;
        let mut out = Model::new();
        for (y, a) in &self.cases[k].assigns {
            let v = match a {
                Assign::Num(t) => Value::Num(eval_term(t, m).map_err(|_| NoCaseMatched)?),
                Assign::Bool(f) => Value::Bool(eval(f, m).map_err(|_| NoCaseMatched)?),
            };
            out.insert(y.clone(), v);
        }
        Ok(out)
    }

    /// The Skolem function as one nested if-then-else per variable.
    pub fn as_ite(&self) -> BTreeMap<Var, Assign> {
        let mut out = BTreeMap::new();
        let Some(last) = self.cases.last() else { return out };
        for (y, a) in &last.assigns {
            let mut acc = a.clone();
            for c in self.cases[..self.cases.len() - 1].iter().rev() {
                let here = c.assigns.get(y).cloned().unwrap_or_else(|| default_assign(y));
                acc = match (here, acc) {
                    (Assign::Num(t), Assign::Num(e)) => Assign::Num(Term::ite(c.guard.clone(), t, e)),
                    (Assign::Bool(t), Assign::Bool(e)) => Assign::Bool(Formula::or([
                        Formula::and([c.guard.clone(), t]),
                        Formula::and([Formula::not(c.guard.clone()), e]),
                    ])),
                    _ => unreachable!("assignments keep their sort"),
                };
            }
            out.insert(y.clone(), acc);
        }
        out
    }
}

fn default_assign(y: &Var) -> Assign {
    match y.sort() {
        Sort::Bool => Assign::Bool(Formula::False),
        _ => Assign::Num(Term::int(0)),
    }
}

#[derive(Clone, Debug)]
pub enum AeResult {
    Valid { skolem: SkolemFunction, region: RegionOfValidity },
    Invalid { region: RegionOfValidity, counterexample: Model },
    Unknown { reason: String, region: RegionOfValidity },
}

impl AeResult {
    pub fn region(&self) -> &RegionOfValidity {
        match self {
            AeResult::Valid { region, .. }
            | AeResult::Invalid { region, .. }
            | AeResult::Unknown { region, .. } => region,
        }
    }

    pub fn verdict(&self) -> &'static str {
        match self {
            AeResult::Valid { .. } => "valid",
            AeResult::Invalid { .. } => "invalid",
            AeResult::Unknown { .. } => "unknown",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub max_disjuncts: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_disjuncts: 500 }
    }
}

/// Decide `∀xs. S ⇒ ∃ys. T`, growing the region one projection at a time.
pub fn solve(solver: &mut Solver, q: &AeQuery, budget: Budget) -> Result<AeResult, AeError> {
    q.check()?;
    let scope = q.scope();
    let mut region = RegionOfValidity::new(&q.s);
    loop {
        let uncovered = Formula::and([q.s.clone(), Formula::not(region.union())]);
        let probe = Formula::and([uncovered.clone(), q.t.clone()]);
        match solver.check_sat(&probe, &scope)? {
            SatResult::Sat(m) => {
                if region.len() >= budget.max_disjuncts {
                    let reason = format!("more than {} disjuncts", budget.max_disjuncts);
                    return Ok(AeResult::Unknown { reason, region });
                }
                let p = match project(&q.t, &q.ys, &m) {
                    Ok(p) => p,
                    Err(MbpError::Unknown(r)) => return Ok(AeResult::Unknown { reason: r, region }),
                    Err(e) => return Err(e.into()),
                };
                log::trace!("region disjunct {}: {}", region.len(), p.guard);
                region.disjuncts.push(p.guard);
                region.witnesses.push(p.witnesses);
            }
            SatResult::Unknown(reason) => return Ok(AeResult::Unknown { reason, region }),
            SatResult::Unsat => {
                return Ok(match solver.check_sat(&uncovered, &q.xs)? {
                    SatResult::Unsat => {
                        let skolem = SkolemFunction::from_region(&region, &q.ys);
                        AeResult::Valid { skolem, region }
                    }
                    SatResult::Sat(m) => AeResult::Invalid { region, counterexample: m },
                    SatResult::Unknown(reason) => AeResult::Unknown { reason, region },
                });
            }
        }
    }
}

/// Outcome of an audit that may be inconclusive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Audit {
    Pass,
    Fail(String),
    Unknown(String),
}

impl Audit {
    pub fn passed(&self) -> bool {
        matches!(self, Audit::Pass)
    }
}

fn validity_audit(v: Validity, what: impl FnOnce() -> String) -> Audit {
    match v {
        Validity::Valid => Audit::Pass,
        Validity::CounterModel(m) => Audit::Fail(format!("{}: countermodel {m}", what())),
        Validity::Unknown(r) => Audit::Unknown(r),
    }
}

/// Check both directions of `∀x. S ⇒ (R ⇔ ∃y. T)`.
pub fn check_region_maximal(
    solver: &mut Solver,
    q: &AeQuery,
    region: &RegionOfValidity,
) -> Result<Audit, AeError> {
    let exists = eliminate_all(solver, &q.t, &q.ys)?;
    // ⇒: each disjunct is backed by its witnesses, or by ∃y.T when none were kept.
    for (i, p) in region.disjuncts.iter().enumerate() {
        let premise = Formula::and([q.s.clone(), p.clone()]);
        let goal = match region.witnesses.get(i) {
            Some(w) => substitute(&q.t, w).map_err(SmtError::from)?,
            None => exists.clone(),
        };
        let a = validity_audit(solver.check_valid(&Formula::implies(premise, goal), &q.xs)?, || {
            format!("disjunct {i} not contained in ∃y.T")
        });
        if !a.passed() {
            return Ok(a);
        }
    }
    // ⇐
    let missed = Formula::and([q.s.clone(), exists, Formula::not(region.union())]);
    Ok(match solver.check_sat(&missed, &q.xs)? {
        SatResult::Unsat => Audit::Pass,
        SatResult::Sat(m) => Audit::Fail(format!("region misses {m}")),
        SatResult::Unknown(r) => Audit::Unknown(r),
    })
}

/// For a Valid result: every case is sound under `S ∧ guard`, and the
/// guards cover `S`.
pub fn check_skolem(solver: &mut Solver, q: &AeQuery, skolem: &SkolemFunction) -> Result<Audit, AeError> {
    for (k, c) in skolem.cases.iter().enumerate() {
        let premise = Formula::and([q.s.clone(), c.guard.clone()]);
        let goal = substitute(&q.t, &c.assigns).map_err(SmtError::from)?;
        let a = validity_audit(solver.check_valid(&Formula::implies(premise, goal), &q.xs)?, || {
            format!("case {k} does not establish T")
        });
        if !a.passed() {
            return Ok(a);
        }
    }
    let covered = Formula::or(skolem.cases.iter().map(|c| c.guard.clone()));
    Ok(validity_audit(solver.check_valid(&Formula::implies(q.s.clone(), covered), &q.xs)?, || {
        "guards do not cover S".into()
    }))
}
