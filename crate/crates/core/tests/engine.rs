use std::time::Instant;

use reacsynth_core::aeval::check_skolem;
use reacsynth_core::encode::{bounded_domains, encode, FiniteDomains, TransitionSystem};
use reacsynth_core::engine::{certify, synthesize, CertifyError, EngineConfig, SynthesisOutcome, SynthesisRun};
use reacsynth_core::gen;
use reacsynth_core::logic::{eval, rat, Assign, Formula, Term, Var};
use reacsynth_core::lustre::load;
use reacsynth_core::oracle::{oracle_viable, Mode, OracleError};
use reacsynth_core::smt::Solver;

fn solver() -> Solver {
    Solver::from_env().expect("solver available")
}

fn contract(file: &str) -> TransitionSystem {
    let path = format!("{}/tests/data/{file}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap();
    encode(&load(&text).unwrap()).unwrap()
}

fn run(s: &mut Solver, ts: &TransitionSystem) -> SynthesisRun {
    synthesize(s, ts, &EngineConfig::default()).unwrap()
}

/// Every viable state is in every candidate set; refinements remove states.
fn check_against_oracle(s: &mut Solver, ts: &TransitionSystem, d: &FiniteDomains) {
    let o = oracle_viable(ts, d, Mode::Parallel).unwrap();
    let r = run(s, ts);
    assert_eq!(r.outcome.verdict(), o.verdict(), "{}\n{}", ts.name, ts.to_smtlib());
    assert!(r.iterations < EngineConfig::default().max_iterations);
    assert!(r.progress_held(), "{}", ts.name);
    for f in &r.fixpoints {
        for st in o.viable_states() {
            assert!(eval(f, st).unwrap(), "{}: viable {st} outside {f}", ts.name);
        }
    }
    if let SynthesisOutcome::Realizable { .. } = r.outcome {
        assert!(certify(s, ts, &r.outcome).unwrap().certified());
    }
}

#[test]
fn hand_systems_match_explicit_enumeration() {
    let mut s = solver();
    let expect = [("toggle", Some(2)), ("overflow_counter", None), ("reset_counter", None), ("wrap_counter", Some(11))];
    for (ts, (name, viable)) in gen::hand_systems().iter().zip(expect) {
        assert_eq!(ts.name, name);
        let d = bounded_domains(ts).unwrap();
        let o = oracle_viable(ts, &d, Mode::Sequential).unwrap();
        assert_eq!(o.viable_states().count(), viable.unwrap_or(0), "{name}");
        assert_eq!(o.realizable(), viable.is_some(), "{name}");
        check_against_oracle(&mut s, ts, &d);
    }
}

#[test]
fn random_finite_systems_match_oracle() {
    let mut s = solver();
    for seed in 0..150 {
        let ts = gen::finite_system(&mut gen::rng(seed), &format!("random{seed}"));
        let d = bounded_domains(&ts).unwrap();
        check_against_oracle(&mut s, &ts, &d);
    }
}

#[test]
fn oracle_modes_agree() {
    for seed in 0..40 {
        let ts = gen::finite_system(&mut gen::rng(1000 + seed), "r");
        let d = bounded_domains(&ts).unwrap();
        let a = oracle_viable(&ts, &d, Mode::Parallel).unwrap();
        let b = oracle_viable(&ts, &d, Mode::Sequential).unwrap();
        assert_eq!(a.viable, b.viable);
        assert_eq!(a.initial, b.initial);
    }
}

#[test]
fn oracle_refuses_huge_spaces() {
    let xs: Vec<Var> = (0..4).map(|k| Var::int(format!("x{k}"))).collect();
    let bound = |v: &Var| Formula::and([Formula::ge(Term::var(v), Term::int(0)), Formula::le(Term::var(v), Term::int(99))]);
    let init = Formula::and(xs.iter().map(bound));
    let trans = Formula::and(xs.iter().map(|v| bound(&v.primed())));
    let ts = TransitionSystem::new("big", xs, vec![], Formula::True, init, trans).unwrap();
    let d = bounded_domains(&ts).unwrap();
    assert!(matches!(oracle_viable(&ts, &d, Mode::Parallel), Err(OracleError::SpaceTooLarge(_))));
}

#[test]
fn valid_skolems_are_sound() {
    let mut s = solver();
    for seed in 0..30 {
        let ts = gen::finite_system(&mut gen::rng(2000 + seed), "r");
        for (q, sk) in &run(&mut s, &ts).valid_queries {
            let audit = check_skolem(&mut s, q, sk).unwrap();
            assert!(audit.passed(), "seed {seed}: {audit:?}");
        }
    }
}

#[test]
fn perturbed_assignment_fails_certification() {
    // x' = i: the only Skolem term is i itself
    let x = Var::int("x");
    let i = Var::int("i");
    let a = Formula::and([Formula::ge(Term::var(&i), Term::int(0)), Formula::le(Term::var(&i), Term::int(3))]);
    let trans = Formula::eq(Term::var(&x.primed()), Term::var(&i));
    let ts = TransitionSystem::new("copy", vec![x.clone()], vec![i], a, Formula::True, trans).unwrap();
    let mut s = solver();
    let r = run(&mut s, &ts);
    assert!(certify(&mut s, &ts, &r.outcome).unwrap().certified());
    let mutated = bump(&r.outcome, &x.primed());
    assert!(matches!(certify(&mut s, &ts, &mutated), Err(CertifyError::CertificationFailed(_))));
}

/// Add 1 to `v`'s assignment in the first case.
fn bump(outcome: &SynthesisOutcome, v: &Var) -> SynthesisOutcome {
    let SynthesisOutcome::Realizable { initial, skolem, fixpoint } = outcome else { panic!("{outcome:?}") };
    let mut skolem = skolem.clone();
    let Some(Assign::Num(t)) = skolem.cases[0].assigns.get(v).cloned() else { panic!("no numeric case") };
    skolem.cases[0].assigns.insert(v.clone(), Assign::Num(Term::sum([t, Term::constant(rat(1))])));
    SynthesisOutcome::Realizable { initial: initial.clone(), skolem, fixpoint: fixpoint.clone() }
}

#[test]
fn cinderella_three_is_realizable() {
    let ts = contract("cinderella_c3.lus");
    let mut s = solver();
    let t = Instant::now();
    let r = run(&mut s, &ts);
    assert_eq!(r.outcome.verdict(), "realizable", "{:?}", r.trace);
    assert!(t.elapsed().as_secs() < 600);
    assert!(r.progress_held());
    assert!(certify(&mut s, &ts, &r.outcome).unwrap().certified());
    let mutated = bump(&r.outcome, &Var::real("b1'"));
    assert!(matches!(certify(&mut s, &ts, &mutated), Err(CertifyError::CertificationFailed(_))));
}

#[test]
fn cinderella_without_assumptions_is_unrealizable() {
    let ts = contract("cinderella_unreal.lus");
    assert_eq!(ts.assumptions, Formula::True);
    let r = run(&mut solver(), &ts);
    assert_eq!(r.outcome.verdict(), "unrealizable");
    assert!(r.progress_held());
}

#[test]
fn trace_lines_carry_the_documented_fields() {
    let r = run(&mut solver(), &gen::overflow_counter());
    for rec in &r.trace {
        let v = serde_json::to_value(rec).unwrap();
        for key in ["iteration", "phi_verdict", "region_disjuncts", "w_disjuncts", "F_size", "elapsed_ms"] {
            assert!(v.get(key).is_some(), "{key} missing in {v}");
        }
    }
    assert_eq!(r.fixpoints.len(), r.history.len() + 1);
}
