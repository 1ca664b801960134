use std::collections::BTreeMap;

use proptest::prelude::*;
use reacsynth_core::gen::{self, contract::ProgramShape};
use reacsynth_core::logic::{Sort, Value};
use reacsynth_core::lustre::interp::{CheckedInterp, RawInterp};
use reacsynth_core::lustre::printer::print_program;
use reacsynth_core::lustre::{elaborate, parse, LustreError};

const GAME: &str = include_str!("data/cinderella_c2.lus");

#[test]
fn game_contract_parses() {
    let p = parse(GAME).unwrap();
    let node = p.node("game").unwrap();
    assert_eq!(node.params.len(), 6);
    let locals: Vec<&str> = node.locals.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(locals, ["b1", "b2", "b3", "b4", "b5"]);
    assert_eq!(node.asserts().count(), 2);
    let c = elaborate(&p).unwrap();
    assert_eq!(c.properties, ["guarantee"]);
}

#[test]
fn game_contract_elaborates() {
    let c = elaborate(&parse(GAME).unwrap()).unwrap();
    let inputs: Vec<&str> = c.inputs.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(inputs, ["i1", "i2", "i3", "i4", "i5"]);
    let state: Vec<&str> = c.state.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(state, ["e", "guarantee", "b1", "b2", "b3", "b4", "b5"]);
    assert_eq!(c.sort_of("e"), Some(Sort::Int));
    assert_eq!(c.equations.len(), 6);
}

#[test]
fn minimal_node() {
    let p = parse("node n() returns (p: bool); let p = true; tel;").unwrap();
    let c = elaborate(&p).unwrap();
    assert!(c.inputs.is_empty());
    assert_eq!(c.properties, ["p"]);
}

#[test]
fn unbalanced_let_is_a_syntax_error() {
    let err = parse("node n() returns (p: bool); let p = true;").unwrap_err();
    assert!(matches!(err, LustreError::Syntax(_)));
    assert!(err.to_string().contains("end of input"), "{err}");
}

#[test]
fn unguarded_self_pre_is_illegal() {
    let p = parse("node n(i: int) returns (x: int); let x = pre(x); tel;").unwrap();
    assert!(matches!(elaborate(&p), Err(LustreError::IllegalPre(_))));
}

#[test]
fn helper_inlined_at_two_sites() {
    let src = "node empty(b: real) returns (z: real); let z = 0.0 -> pre(z) + b; tel;
               node main(x: real) returns (u, v: real; ok: bool);
               let u = empty(x); v = empty(2.0 * x); ok = u <= v; tel;";
    let p = parse(src).unwrap();
    let c = elaborate(&p).unwrap();
    let fresh: Vec<&str> =
        c.state.iter().map(|(n, _)| n.as_str()).filter(|n| n.starts_with("empty_")).collect();
    assert_eq!(fresh.len(), 2);
    assert_ne!(fresh[0], fresh[1]);
    let mut raw = RawInterp::new(&p, "main").unwrap();
    let mut el = CheckedInterp::new(&c);
    let mut rng = gen::rng(3);
    for _ in 0..30 {
        let free = gen::contract::stream_inputs(&mut rng, p.node("main").unwrap());
        let a = raw.step(&free).unwrap();
        let b = el.step(&free).unwrap();
        for k in ["x", "u", "v", "ok"] {
            assert_eq!(a.values[k], b.values[k]);
        }
    }
}

fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_parse_round_trip(seed in seeds()) {
        let p = gen::contract::program(&mut gen::rng(seed), &ProgramShape::default());
        let once = parse(&print_program(&p)).unwrap();
        let twice = parse(&print_program(&once)).unwrap();
        prop_assert_eq!(&once, &p);
        prop_assert_eq!(twice, once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn elaboration_preserves_stream_semantics(seed in seeds()) {
        let mut rng = gen::rng(seed);
        let p = gen::contract::program(&mut rng, &ProgramShape::default());
        let c = match elaborate(&p) {
            Ok(c) => c,
            Err(e) => return Err(TestCaseError::fail(format!("{e}\n{}", print_program(&p)))),
        };
        let main = p.node("main").unwrap();
        let names: Vec<String> = main.params.iter().chain(&main.returns).chain(&main.locals).map(|d| d.name.clone()).collect();
        let mut raw = RawInterp::new(&p, "main").unwrap();
        let mut el = CheckedInterp::new(&c);
        for t in 0..50 {
            let free: BTreeMap<String, Value> = gen::contract::stream_inputs(&mut rng, main);
            let a = raw.step(&free).unwrap();
            let b = el.step(&free).unwrap();
            for n in &names {
                prop_assert_eq!(&a.values[n], &b.values[n], "{} at {}\n{}", n, t, print_program(&p));
            }
            prop_assert_eq!(&a.asserts, &b.asserts);
        }
    }
}
