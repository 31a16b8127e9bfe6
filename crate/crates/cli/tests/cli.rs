use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn dbagg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbagg")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(name: &str, v: &Value) -> String {
    let path: PathBuf = [env!("CARGO_TARGET_TMPDIR"), name].iter().collect();
    fs::write(&path, v.to_string()).unwrap();
    path.to_string_lossy().into_owned()
}

fn paradox_profile() -> Value {
    let schema = json!({"P": 1, "Q": 2});
    json!({"agents": [
        {"schema": schema, "relations": {"P": [["a"]], "Q": [["a", "b"]]}},
        {"schema": schema, "relations": {"P": [["a"]], "Q": [["a", "c"]]}}
    ]})
}

const PHI: &str = "forall x.(P(x) -> exists y. Q(x,y))";

#[test]
fn aggregate_majority() {
    let p = write("paradox_profile.json", &paradox_profile());
    let o = dbagg(&["aggregate", "--rule", "majority", "--profile", &p, "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o), json!({"schema": {"P": 1, "Q": 2}, "relations": {"P": [["a"]], "Q": []}}));
}

#[test]
fn aggregate_accepts_rule_json() {
    let p = write("paradox_profile_json_rule.json", &paradox_profile());
    let o = dbagg(&["aggregate", "--rule", r#"{"rule":"quota","default":1}"#, "--profile", &p, "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["relations"]["Q"], json!([["a", "b"], ["a", "c"]]));
}

#[test]
fn check_lift_finds_paradox_and_replays() {
    let o = dbagg(&["check-lift", "--rule", "majority", "--sentence", PHI, "--n", "2", "--domain", "3", "--json"]);
    assert_eq!(code(&o), 1);
    let report = stdout_json(&o);
    assert_eq!(report["status"], "paradox");
    assert_eq!(report["witness"]["aggregate"]["relations"]["Q"], json!([]));
    let path = write("lift_report.json", &report);
    assert_eq!(code(&dbagg(&["replay", &path])), 1);

    let mut forged = report.clone();
    forged["witness"]["profile"]["agents"][1]["relations"]["Q"] = json!([]);
    let path = write("lift_forged.json", &forged);
    assert_eq!(code(&dbagg(&["replay", &path])), 2);
}

#[test]
fn lifted_verdict_replays_to_success() {
    let c = r#"{"fd":{"P":"P","k":1}}"#;
    let o =
        dbagg(&["check-lift", "--rule", "intersection", "--constraint", c, "--schema", "P/2", "--n", "3", "--json"]);
    assert_eq!(code(&o), 0);
    let path = write("lift_holds.json", &stdout_json(&o));
    assert_eq!(code(&dbagg(&["replay", &path])), 0);
}

#[test]
fn query_example() {
    let d = write("d1.json", &json!({"schema": {"P": 2}, "relations": {"P": [["a", "b"]]}}));
    let o = dbagg(&["query", "--query", "exists y. P(x,y)", "--instance", &d]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o), json!([["a"]]));
}

#[test]
fn eval_exit_codes() {
    let d = write("d_eval.json", &json!({"schema": {"P": 2}, "relations": {"P": [["a", "b"]]}}));
    assert_eq!(code(&dbagg(&["eval", "--sentence", "exists x. P(x, 'b')", "--instance", &d])), 0);
    assert_eq!(code(&dbagg(&["eval", "--sentence", "P('b', 'a')", "--instance", &d])), 1);
    assert_eq!(code(&dbagg(&["eval", "--sentence", "R('b')", "--instance", &d])), 2);
}

#[test]
fn commute_example() {
    let schema = json!({"P": 2, "R": 1});
    let p = write(
        "example_profile.json",
        &json!({"agents": [
            {"schema": schema, "relations": {"P": [["a", "b"]]}},
            {"schema": schema, "relations": {"P": [["a", "d"]]}}
        ]}),
    );
    let o = dbagg(&[
        "commute",
        "--rule",
        "intersection",
        "--star",
        "intersection",
        "--query",
        "exists y. P(x,y)",
        "--profile",
        &p,
        "--json",
    ]);
    assert_eq!(code(&o), 1);
    let r = stdout_json(&o);
    assert_eq!((r["lhs"].clone(), r["rhs"].clone()), (json!([]), json!([["a"]])));
    let path = write("commute_report.json", &r);
    assert_eq!(code(&dbagg(&["replay", &path])), 1);
    let o = dbagg(&["commute", "--rule", "union", "--star", "union", "--query", "exists y. P(x,y)", "--profile", &p]);
    assert_eq!(code(&o), 0);
}

#[test]
fn axioms_report_round_trips() {
    let o = dbagg(&["axioms", "--rule", "dictator:1", "--schema", "P/1", "--n", "2", "--domain", "1", "--json"]);
    assert_eq!(code(&o), 1);
    let report = stdout_json(&o);
    let a = report.as_array().unwrap().iter().find(|v| v["axiom"] == "A").unwrap();
    assert_eq!(a["status"], "counterexample");
    assert_eq!(a["witness"]["agent_permutation"], json!([2, 1]));
    let path = write("axioms_report.json", &report);
    assert_eq!(code(&dbagg(&["replay", &path])), 1);

    let o = dbagg(&["axioms", "--rule", "union", "--axiom", "U,G,I", "--schema", "P/1", "--n", "2", "--json"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn experiments_report_claims() {
    let o = dbagg(&["experiments", "fd-threshold", "--n", "3", "--json"]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    let lifted: Vec<&str> =
        r["verdicts"].as_array().unwrap().iter().map(|v| v["verdict"]["status"].as_str().unwrap()).collect();
    assert_eq!(lifted, ["paradox", "lifted_within_bounds", "lifted_within_bounds"]);
    let o = dbagg(&["experiments", "distance-majority", "--n", "3", "--domain", "2"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("64 profiles, 0 mismatches"));
    assert_eq!(code(&dbagg(&["experiments", "ric", "--n", "2"])), 0);
    assert_eq!(code(&dbagg(&["experiments", "nonsense"])), 2);
}

#[test]
fn json_output_is_stable() {
    let args = ["experiments", "quota-char", "--json"];
    let a = dbagg(&args);
    let b = dbagg(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let m = dbagg(&["experiments", "quota-char", "--json", "--meta"]);
    assert_eq!(m.stdout, a.stdout);
    assert!(String::from_utf8_lossy(&m.stderr).contains("elapsed_ms"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&dbagg(&["aggregate", "--rule", "majority", "--profile", "/nonexistent.json"])), 2);
    assert_eq!(code(&dbagg(&["aggregate", "--rule", "bogus", "--profile", "{}"])), 2);
    assert_eq!(code(&dbagg(&["check-lift", "--rule", "union", "--sentence", "forall x. P(x", "--n", "2"])), 2);
    assert_eq!(
        code(&dbagg(&[
            "check-lift",
            "--rule",
            "union",
            "--sentence",
            PHI,
            "--n",
            "3",
            "--domain",
            "3",
            "--ceiling",
            "10"
        ])),
        2
    );
    assert_eq!(code(&dbagg(&["frobnicate"])), 2);
}
