use proptest::prelude::*;
use rand::Rng;

use reacsynth_core::gen::{self, Shape};
use reacsynth_core::logic::{
    eval, eval_term, nnf, simplify, substitute, Assign, Formula, Model, Sort, Subst, Term, Value,
    Var,
};

fn scope() -> Vec<Var> {
    vec![
        Var::real("x"),
        Var::real("y"),
        Var::int("n"),
        Var::int("k"),
        Var::bool("p"),
        Var::bool("q"),
    ]
}

fn case(seed: u64) -> (Formula, Model) {
    let mut rng = gen::rng(seed);
    let vars = scope();
    let f = gen::formula(&mut rng, &vars, &Shape::default());
    let m = gen::model(&mut rng, &vars, 6);
    (f, m)
}

fn nnf_shaped(f: &Formula) -> bool {
    match f {
        Formula::Not(g) => matches!(**g, Formula::BoolVar(_) | Formula::Divides(..)),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().all(nnf_shaped),
        Formula::Implies(..) | Formula::Iff(..) => false,
        Formula::Atom(_, op, _) => *op != reacsynth_core::logic::RelOp::Ne,
        _ => true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn nnf_preserves_semantics(seed in any::<u64>()) {
        let (f, m) = case(seed);
        let g = nnf(&f);
        prop_assert!(nnf_shaped(&g), "not in nnf: {g}");
        prop_assert_eq!(eval(&g, &m).unwrap(), eval(&f, &m).unwrap());
    }

    #[test]
    fn simplify_preserves_semantics(seed in any::<u64>()) {
        let (f, m) = case(seed);
        prop_assert_eq!(eval(&simplify(&f), &m).unwrap(), eval(&f, &m).unwrap());
    }

    #[test]
    fn simplify_is_idempotent(seed in any::<u64>()) {
        let (f, _) = case(seed);
        let once = simplify(&f);
        prop_assert_eq!(simplify(&once), once);
    }

    #[test]
    fn substitution_commutes_with_eval(seed in any::<u64>()) {
        let (f, m) = case(seed);
        let mut rng = gen::rng(seed ^ 0x5eed);
        let vars = scope();
        let ints: Vec<Var> = vars.iter().filter(|v| v.sort() == Sort::Int).cloned().collect();
        let shape = Shape { fractions: false, ..Shape::default() };
        let mut sigma = Subst::new();
        for v in &vars {
            if rng.gen_bool(0.4) {
                continue;
            }
            let a = match v.sort() {
                Sort::Real => Assign::Num(gen::linear_term(&mut rng, &vars, &Shape::default())),
                Sort::Int => Assign::Num(gen::linear_term(&mut rng, &ints, &shape)),
                Sort::Bool => Assign::Bool(gen::atom(&mut rng, &vars, &Shape::default())),
            };
            sigma.insert(v.clone(), a);
        }
        let mut image = m.clone();
        for (v, a) in &sigma {
            let value = match a {
                Assign::Num(t) => Value::Num(eval_term(t, &m).unwrap()),
                Assign::Bool(g) => Value::Bool(eval(g, &m).unwrap()),
            };
            image.insert(v.clone(), value);
        }
        let g = substitute(&f, &sigma).unwrap();
        prop_assert_eq!(eval(&g, &m).unwrap(), eval(&f, &image).unwrap());
    }
}

#[test]
fn substitution_rejects_sort_changes() {
    let x = Var::real("x");
    let p = Var::bool("p");
    let f = Formula::var(&p);
    let mut sigma = Subst::new();
    sigma.insert(p, Assign::Num(Term::var(&x)));
    assert!(substitute(&f, &sigma).is_err());
}
