use reacsynth_core::aeval::{
    check_region_maximal, check_skolem, solve, AeQuery, AeResult, Audit, Budget, RegionOfValidity,
};
use reacsynth_core::gen;
use reacsynth_core::logic::{eval, rat, Assign, Formula, LinExpr, Term, Var};
use reacsynth_core::smt::{SatResult, Solver, Validity};

fn solver() -> Solver {
    Solver::from_env().expect("solver available")
}

fn x() -> Var {
    Var::real("x")
}

fn y() -> Var {
    Var::real("y")
}

#[test]
fn successor_is_valid_with_one_case() {
    let mut s = solver();
    let t = Formula::eq(Term::var(&y()), Term::sum([Term::var(&x()), Term::int(1)]));
    let q = AeQuery::new(vec![x()], vec![y()], Formula::True, t).unwrap();
    let AeResult::Valid { skolem, region } = solve(&mut s, &q, Budget::default()).unwrap() else {
        panic!("expected valid");
    };
    assert_eq!(region.closed_form(), Formula::True);
    assert_eq!(skolem.cases.len(), 1);
    let Assign::Num(w) = &skolem.cases[0].assigns[&y()] else { panic!() };
    assert_eq!(w.to_linear().unwrap(), LinExpr::var(&x()) + LinExpr::constant(rat(1)));
}

fn bounded_double() -> AeQuery {
    let t = Formula::and([
        Formula::le(Term::var(&x()), Term::int(5)),
        Formula::eq(Term::var(&y()), Term::scale(rat(2), Term::var(&x()))),
    ]);
    AeQuery::new(vec![x()], vec![y()], Formula::True, t).unwrap()
}

#[test]
fn bounded_double_is_invalid_beyond_five() {
    let mut s = solver();
    let q = bounded_double();
    let AeResult::Invalid { region, counterexample } = solve(&mut s, &q, Budget::default()).unwrap()
    else {
        panic!("expected invalid");
    };
    assert!(counterexample.num(&x()).unwrap() > &rat(5));
    let same = Formula::iff(region.closed_form(), Formula::le(Term::var(&x()), Term::int(5)));
    assert_eq!(s.check_valid(&same, &[x()]).unwrap(), Validity::Valid);
    assert!(!eval(&region.closed_form(), &counterexample).unwrap());
    assert_eq!(check_region_maximal(&mut s, &q, &region).unwrap(), Audit::Pass);
}

#[test]
fn deleting_a_disjunct_breaks_maximality() {
    let mut s = solver();
    let q = bounded_double();
    let region = solve(&mut s, &q, Budget::default()).unwrap().region().clone();
    assert!(!region.is_empty());
    let audit = check_region_maximal(&mut s, &q, &region.without(0)).unwrap();
    assert!(matches!(audit, Audit::Fail(_)), "{audit:?}");
}

#[test]
fn unsatisfiable_antecedent_is_vacuous() {
    let mut s = solver();
    let sx = Formula::and([
        Formula::gt(Term::var(&x()), Term::int(1)),
        Formula::lt(Term::var(&x()), Term::int(0)),
    ]);
    let q = AeQuery::new(vec![x()], vec![y()], sx.clone(), Formula::False).unwrap();
    let r = solve(&mut s, &q, Budget::default()).unwrap();
    assert!(matches!(r, AeResult::Valid { .. }));
    let empty = RegionOfValidity::from_disjuncts(sx, vec![]);
    assert_eq!(check_region_maximal(&mut s, &q, &empty).unwrap(), Audit::Pass);
}

#[test]
fn scopes_must_be_disjoint() {
    assert!(AeQuery::new(vec![x()], vec![x()], Formula::True, Formula::True).is_err());
    let t = Formula::le(Term::var(&Var::real("z")), Term::int(0));
    assert!(AeQuery::new(vec![x()], vec![y()], Formula::True, t).is_err());
}

#[test]
fn budget_exhaustion_is_unknown() {
    let mut s = solver();
    // The first disjunct already exceeds a zero budget.
    let q = bounded_double();
    let r = solve(&mut s, &q, Budget { max_disjuncts: 0 }).unwrap();
    assert!(matches!(r, AeResult::Unknown { .. }));
}

fn random_query(seed: u64) -> AeQuery {
    let mut rng = gen::rng(seed);
    let (xs, ys, sx, t) = gen::ae_query(&mut rng, 3, 2, 8);
    AeQuery::new(xs, ys, sx, t).unwrap()
}

#[test]
fn random_queries_satisfy_region_and_skolem_audits() {
    let mut s = solver();
    let mut valid = 0;
    for seed in 0..150u64 {
        let q = random_query(seed);
        let r = solve(&mut s, &q, Budget::default()).unwrap();
        let region = r.region();
        // Progress: every disjunct was new when found.
        for i in 0..region.len() {
            let earlier = Formula::or(region.disjuncts()[..i].iter().cloned());
            let fresh = Formula::and([q.s.clone(), region.disjuncts()[i].clone(), Formula::not(earlier)]);
            assert!(matches!(s.check_sat(&fresh, &q.xs).unwrap(), SatResult::Sat(_)), "seed {seed}");
        }
        assert_eq!(check_region_maximal(&mut s, &q, region).unwrap(), Audit::Pass, "seed {seed}");
        match &r {
            AeResult::Valid { skolem, .. } => {
                valid += 1;
                assert_eq!(check_skolem(&mut s, &q, skolem).unwrap(), Audit::Pass, "seed {seed}");
            }
            AeResult::Invalid { region, counterexample } => {
                let out = Formula::and([q.s.clone(), Formula::not(region.closed_form())]);
                assert!(eval(&out, counterexample).unwrap(), "seed {seed}");
            }
            AeResult::Unknown { reason, .. } => panic!("seed {seed}: unknown ({reason})"),
        }
    }
    assert!(valid > 10, "too few valid queries to be meaningful: {valid}");
}

#[test]
fn solving_is_deterministic() {
    for seed in [3u64, 17, 42] {
        let q = random_query(seed);
        let a = solve(&mut solver(), &q, Budget::default()).unwrap();
        let b = solve(&mut solver(), &q, Budget::default()).unwrap();
        assert_eq!(a.region(), b.region());
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
