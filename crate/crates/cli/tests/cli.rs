use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn suite() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks")
}

fn reacsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reacsynth")).args(args).output().expect("binary runs")
}

fn contract(name: &str) -> String {
    suite().join(name).display().to_string()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn unrealizable_cinderella_exits_10() {
    let out = reacsynth(&["synth", &contract("cinderella_unreal.lus")]);
    assert_eq!(out.status.code(), Some(10));
    let r = json(&out);
    assert_eq!(r["verdict"], "unrealizable");
    assert_eq!(r["schema_version"], 1);
}

#[test]
fn missing_file_is_an_error_with_a_diagnostic() {
    let out = reacsynth(&["synth", "missing.lus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read missing.lus"));
    assert_eq!(json(&out)["verdict"], "error");
}

#[test]
fn syntax_errors_carry_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.lus");
    std::fs::write(&p, "node n() returns (p: bool);\nlet p = ; tel;").unwrap();
    let out = reacsynth(&["synth", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2:"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn realizable_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("ctl.c");
    let trace = dir.path().join("trace.jsonl");
    let ctl = dir.path().join("ctl.json");
    let report = dir.path().join("report.json");
    let out = reacsynth(&[
        "synth",
        &contract("water_tank.lus"),
        "--emit-c",
        c.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--save-controller",
        ctl.to_str().unwrap(),
        "--simulate",
        "100",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["verdict"], "realizable");
    assert_eq!(r["certified"], true);
    assert_eq!(r["simulation"]["steps"], 100);
    assert_eq!(r["simulation"]["violations"], 0);
    let src = std::fs::read_to_string(&c).unwrap();
    assert_eq!(r["emitted_loc"], src.lines().filter(|l| !l.trim().is_empty()).count());
    let lines = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(lines.lines().count() as u64, r["iterations"].as_u64().unwrap());
    for l in lines.lines() {
        let rec: serde_json::Value = serde_json::from_str(l).unwrap();
        assert!(rec.get("F_size").is_some());
    }
    assert!(std::fs::read_to_string(&ctl).unwrap().contains("\"stateVars\""));
}

#[test]
fn reports_are_reproducible_under_a_seed() {
    let run = || {
        let mut r = json(&reacsynth(&["synth", &contract("bounded_sum.lus"), "--simulate", "50", "--seed", "9"]));
        r.as_object_mut().unwrap().remove("time_s");
        r
    };
    assert_eq!(run(), run());
}

#[test]
fn csv_output_for_one_contract() {
    let out = reacsynth(&["synth", &contract("toggle.lus"), "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("name,verdict,iterations,time_s,skolem_cases,emitted_loc,certified,sim_steps,sim_violations")
    );
    assert!(lines.next().unwrap().starts_with("toggle,realizable,"));
}

#[test]
fn dump_ts_prints_definitions() {
    let out = reacsynth(&["synth", &contract("toggle.lus"), "--dump-ts"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("define-fun"));
}

#[test]
fn query_log_collects_smt2_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = reacsynth(&["synth", &contract("toggle.lus"), "--query-log", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let n = std::fs::read_dir(dir.path()).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "smt2")).count();
    assert!(n > 0);
}

#[test]
fn bad_solver_path_is_an_error() {
    let out = reacsynth(&["synth", &contract("toggle.lus"), "--solver-path", "/nonexistent/solver"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn empty_bench_dir_gives_empty_csv_and_zero_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = reacsynth(&["bench", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    let out = reacsynth(&["bench", dir.path().to_str().unwrap(), "--json"]);
    let j = json(&out);
    assert_eq!(j["reports"].as_array().unwrap().len(), 0);
    assert_eq!(j["summary"]["contracts"], 0);
    assert_eq!(j["summary"]["solved"], 0);
    assert_eq!(j["summary"]["max_time_s"], 0.0);
}

#[test]
fn tight_budget_yields_unknown_rows_without_hurting_the_rest() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["cinderella_c2.lus", "counter_reset.lus", "arbiter_conflict.lus"] {
        std::fs::copy(suite().join(f), dir.path().join(f)).unwrap();
    }
    let out = reacsynth(&["bench", dir.path().to_str().unwrap(), "--timeout", "1", "--json", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let j = json(&out);
    let verdict = |name: &str| {
        j["reports"].as_array().unwrap().iter().find(|r| r["name"] == name).unwrap()["verdict"].clone()
    };
    assert_eq!(verdict("cinderella_c2"), "unknown");
    assert_eq!(verdict("counter_reset"), "realizable");
    assert_eq!(verdict("arbiter_conflict"), "unrealizable");
    assert_eq!(j["summary"]["solved"], 2);
    assert_eq!(j["summary"]["unknown"], 1);
}

#[test]
fn oracle_check_agrees_on_finite_contracts() {
    for f in ["counter_reset.lus", "counter_overflow.lus", "arbiter.lus"] {
        let out = reacsynth(&["oracle-check", &contract(f)]);
        assert_eq!(out.status.code(), Some(0), "{f}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["agree"], true);
    }
}

#[test]
fn oracle_check_needs_finite_domains() {
    let out = reacsynth(&["oracle-check", &contract("thermostat.lus")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no finite domain"));
}

#[test]
fn aeval_prints_skolem_definitions() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.smt2");
    std::fs::write(
        &q,
        "(define-fun S ((x Real)) Bool (>= x 0.0))\n(define-fun T ((x Real) (y Real)) Bool (and (> y x) (< y (+ x 2.0))))\n",
    )
    .unwrap();
    let out = reacsynth(&["aeval", q.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("; valid"));
    assert!(text.contains("(define-fun region ((x Real)) Bool"));
    assert!(text.contains("(define-fun y ((x Real)) Real"));

    std::fs::write(&q, "(define-fun S ((x Real)) Bool true)\n(define-fun T ((x Real) (y Real)) Bool (and (> y x) (< y 1.0)))\n")
        .unwrap();
    let out = reacsynth(&["aeval", q.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(10));
    assert!(String::from_utf8(out.stdout).unwrap().contains("counterexample"));
}
