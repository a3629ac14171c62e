use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nullcount"))
        .args(args)
        .env_remove("NULLCOUNT_JOBS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn worked_example_counts() {
    let fig1 = data("fig1.idb");
    let o = run(&["count", "-q", "S(X, X)", "--db", &fig1]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "4");
    let o = run(&["count", "-q", "S(X, X)", "--db", &fig1, "--problem", "comp"]);
    assert_eq!(stdout(&o).trim(), "3");
}

#[test]
fn json_counts_are_decimal_strings() {
    let o = run(&["--json", "count", "-q", "S(X, X)", "--db", &data("fig1.idb")]);
    let v = json(&o);
    assert_eq!(v["count"], Value::String("4".into()));
    assert_eq!(v["method"], "codd-per-atom");
    assert_eq!(v["exact"], true);
}

#[test]
fn gadget_database_round_trips_through_count() {
    let o = run(&["--json", "gadget", "vc", "--graph", &data("k3.txt"), "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["holds"], true);
    let dir = std::env::temp_dir().join(format!("nullcount-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("vc.db");
    std::fs::write(&path, v["database"].as_str().unwrap()).unwrap();
    let o = run(&[
        "--json",
        "count",
        "-q",
        v["query"].as_str().unwrap(),
        "--db",
        path.to_str().unwrap(),
        "--problem",
        "comp",
        "--mode",
        "brute",
    ]);
    let c = json(&o);
    assert_eq!(c["count"], v["lhs"]);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn estimates_do_not_depend_on_jobs() {
    let db = data("fig1.idb");
    let count = [
        "count",
        "-q",
        "S(X, Y), S(Y, X)",
        "--db",
        &db,
        "--mode",
        "approx",
        "--seed",
        "7",
    ];
    let with_jobs = |jobs: &str| {
        let mut a = vec!["--json", "--jobs", jobs];
        a.extend_from_slice(&count);
        json(&run(&a))
    };
    let one = with_jobs("1");
    assert_eq!(one["method"], "karp-luby");
    assert_eq!(one["count"], with_jobs("4")["count"]);
    let env = Command::new(env!("CARGO_BIN_EXE_nullcount"))
        .arg("--json")
        .args(count)
        .env("NULLCOUNT_JOBS", "3")
        .output()
        .unwrap();
    assert_eq!(json(&env)["count"], one["count"]);
}

#[test]
fn exit_codes() {
    let fig1 = data("fig1.idb");
    // parse errors and missing files
    assert_eq!(run(&["count", "-q", "S(X,", "--db", &fig1]).status.code(), Some(2));
    assert_eq!(
        run(&["count", "-q", "S(X, X)", "--db", "/nonexistent"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    // no sampler for completions
    let o = run(&[
        "count",
        "-q",
        "S(X, X)",
        "--db",
        &fig1,
        "--problem",
        "comp",
        "--mode",
        "approx",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("never"));
    // hard case without exact algorithm
    let o = run(&["count", "-q", "S(X, Y), S2(Y)", "--db", &fig1, "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    // enumeration beyond the cap
    let o = run(&[
        "count",
        "-q",
        "S(X, X)",
        "--db",
        &fig1,
        "--mode",
        "brute",
        "--valuation-cap",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn verification_failures_map_to_five() {
    let e = nullcount::Error::Verification("x".into());
    assert_eq!(e.exit_code(), 5);
}

#[test]
fn completion_check() {
    let dir = std::env::temp_dir().join(format!("nullcount-check-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let yes = dir.join("yes.db");
    let no = dir.join("no.db");
    std::fs::write(&yes, "S(a, b)\nS(c, a)\nS(a, a)\n").unwrap();
    std::fs::write(&no, "S(a, b)\nS(c, c)\n").unwrap();
    let fig1 = data("fig1.idb");
    let o = run(&["check-completion", "--db", &fig1, "--facts", yes.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "yes (matching)");
    let o = run(&["check-completion", "--db", &fig1, "--facts", no.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "no (matching)");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn classify_reports_both_verdicts() {
    let o = run(&[
        "--json",
        "classify",
        "-q",
        "R(X), S(X)",
        "--table",
        "codd",
        "--domain",
        "non-uniform",
    ]);
    let v = json(&o);
    assert!(v["exact"].as_str().unwrap().starts_with("#P-complete"));
    assert_eq!(v["approx"], "FPRAS");
    let o = run(&[
        "classify",
        "-q",
        "R(X, Y)",
        "--table",
        "codd",
        "--domain",
        "uniform",
        "--problem",
        "comp",
    ]);
    assert!(stdout(&o).contains("approx: open"), "{}", stdout(&o));
}
