use proptest::prelude::*;
use rand::Rng;

use reacsynth_core::gen::{self, Shape};
use reacsynth_core::logic::{
    eval, rat, simplify, substitute, Formula, Model, Sort, Term, Value, Var,
};
use reacsynth_core::mbp::{eliminate_all, project};
use reacsynth_core::smt::{SatResult, Solver, Validity};

fn solver() -> Solver {
    Solver::from_env().expect("solver available")
}

fn all_vars(xs: &[Var], ys: &[Var]) -> Vec<Var> {
    xs.iter().chain(ys).cloned().collect()
}

fn assert_equiv(s: &mut Solver, a: &Formula, b: &Formula, scope: &[Var]) {
    let v = s.check_valid(&Formula::iff(a.clone(), b.clone()), scope).unwrap();
    assert_eq!(v, Validity::Valid, "{a}  <=/=>  {b}");
}

#[test]
fn examples_from_hand_elimination() {
    let mut s = solver();
    let x = Var::real("x");
    let y = Var::real("y");
    let scope = [x.clone()];

    let t = Formula::and([
        Formula::le(Term::var(&x), Term::int(5)),
        Formula::eq(Term::var(&y), Term::scale(rat(2), Term::var(&x))),
    ]);
    let r = eliminate_all(&mut s, &t, std::slice::from_ref(&y)).unwrap();
    assert_equiv(&mut s, &r, &Formula::le(Term::var(&x), Term::int(5)), &scope);

    let empty = Formula::and([
        Formula::ge(Term::var(&y), Term::var(&x)),
        Formula::le(Term::var(&y), Term::sum([Term::var(&x), Term::int(-1)])),
    ]);
    assert_eq!(eliminate_all(&mut s, &empty, std::slice::from_ref(&y)).unwrap(), Formula::False);
    assert_eq!(eliminate_all(&mut s, &Formula::True, &[y]).unwrap(), Formula::True);
}

#[test]
fn projection_examples_validate() {
    let mut s = solver();
    let x = Var::real("x");
    let y = Var::real("y");
    let cases = [
        (
            Formula::and([
                Formula::gt(Term::var(&y), Term::var(&x)),
                Formula::lt(Term::var(&y), Term::sum([Term::var(&x), Term::int(2)])),
            ]),
            Model::new().with(&x, Value::Num(rat(0))).with(&y, Value::Num(rat(1))),
        ),
        (
            Formula::and([
                Formula::eq(Term::var(&y), Term::scale(rat(3), Term::var(&x))),
                Formula::ge(Term::var(&y), Term::int(6)),
            ]),
            Model::new().with(&x, Value::Num(rat(2))).with(&y, Value::Num(rat(6))),
        ),
    ];
    for (t, m) in cases {
        let p = project(&t, std::slice::from_ref(&y), &m).unwrap();
        let inst = substitute(&t, &p.witnesses).unwrap();
        let v = s.check_valid(&Formula::implies(p.guard.clone(), inst), std::slice::from_ref(&x)).unwrap();
        assert_eq!(v, Validity::Valid);
    }
}

fn random_instance(seed: u64) -> (Vec<Var>, Vec<Var>, Formula) {
    let mut rng = gen::rng(seed);
    let (xs, ys, _, t) = gen::ae_query(&mut rng, 3, 3, 6);
    (xs, ys, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_is_sound(seed in any::<u64>()) {
        thread_local!(static S: std::cell::RefCell<Solver> = std::cell::RefCell::new(solver()));
        let (xs, ys, t) = random_instance(seed);
        let scope = all_vars(&xs, &ys);
        S.with(|s| {
            let s = &mut *s.borrow_mut();
            let SatResult::Sat(m) = s.check_sat(&t, &scope).unwrap() else {
                return Ok(());
            };
            let p = project(&t, &ys, &m).unwrap();
            prop_assert!(eval(&p.guard, &m).unwrap(), "guard false at model");
            let ys_set = ys.iter().cloned().collect();
            prop_assert!(!p.guard.mentions_any(&ys_set));
            let inst = substitute(&t, &p.witnesses).unwrap();
            let v = s.check_valid(&Formula::implies(p.guard.clone(), inst), &xs).unwrap();
            prop_assert_eq!(v, Validity::Valid, "T = {}, guard = {}", t, p.guard);
            Ok(())
        })?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn blocking_guards_terminates(seed in any::<u64>()) {
        thread_local!(static S: std::cell::RefCell<Solver> = std::cell::RefCell::new(solver()));
        let (xs, ys, t) = random_instance(seed);
        S.with(|s| {
            let s = &mut *s.borrow_mut();
            let r = eliminate_all(s, &t, &ys).unwrap();
            // r ≡ ∃ys.T: r ⇒ ∃ys.T (each guard is sound) and T ⇒ r.
            let v = s.check_valid(&Formula::implies(t.clone(), r.clone()), &all_vars(&xs, &ys)).unwrap();
            prop_assert_eq!(v, Validity::Valid);
            Ok(())
        })?;
    }
}

#[test]
fn eliminate_all_matches_enumeration() {
    let mut s = solver();
    let shape = Shape { depth: 2, term_width: 2, coeff: 3, constant: 4, fractions: false };
    for seed in 0..60u64 {
        let mut rng = gen::rng(seed);
        let xs = vec![Var::int("a"), Var::bool("p")];
        let ys = vec![Var::int("u"), if rng.gen_bool(0.5) { Var::int("v") } else { Var::bool("v") }];
        let all = all_vars(&xs, &ys);
        let mut parts = vec![gen::cube_or_clause(&mut rng, &all, &shape, 5)];
        for y in ys.iter().filter(|y| y.sort() == Sort::Int) {
            parts.push(Formula::ge(Term::var(y), Term::int(0)));
            parts.push(Formula::le(Term::var(y), Term::int(3)));
        }
        let t = Formula::and(parts);
        let r = eliminate_all(&mut s, &t, &ys).unwrap();
        for a in -8..=8 {
            for p in [false, true] {
                let mx = Model::new().with(&xs[0], Value::Num(rat(a))).with(&xs[1], Value::Bool(p));
                let mut exists = false;
                for u in 0..=3 {
                    let vs: Vec<Value> = if ys[1].sort() == Sort::Bool {
                        vec![Value::Bool(false), Value::Bool(true)]
                    } else {
                        (0..=3).map(|k| Value::Num(rat(k))).collect()
                    };
                    for v in vs {
                        let m = mx.clone().with(&ys[0], Value::Num(rat(u))).with(&ys[1], v);
                        exists |= eval(&t, &m).unwrap();
                    }
                }
                assert_eq!(eval(&r, &mx).unwrap(), exists, "seed {seed}: T = {t}, r = {}", simplify(&r));
            }
        }
    }
}
