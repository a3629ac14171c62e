//! Runs the example programs built alongside the tests.

use std::path::PathBuf;
use std::process::Command;

fn example(name: &str) -> String {
    let mut dir: PathBuf = std::env::current_exe().unwrap();
    dir.pop();
    if dir.ends_with("deps") {
        dir.pop();
    }
    let path = dir
        .join("examples")
        .join(format!("{name}{}", std::env::consts::EXE_SUFFIX));
    assert!(path.exists(), "example {name} not built at {}", path.display());
    let out = Command::new(&path).output().unwrap();
    assert!(
        out.status.success(),
        "{name} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn worked_example() {
    let out = example("worked_example");
    assert!(out.contains("#Val(q) = 4"));
    assert!(out.contains("#Comp(q) = 3"));
}

#[test]
fn patterns() {
    assert!(example("patterns").lines().next().unwrap().ends_with("true"));
}

#[test]
fn dichotomy() {
    let out = example("dichotomy");
    assert_eq!(out.lines().filter(|l| l.starts_with("  ")).count(), 48);
}

#[test]
fn exact_counting() {
    for line in example("exact_counting").lines() {
        let (fast, slow) = line.rsplit_once(" (enumeration ").unwrap();
        assert_eq!(fast.rsplit(' ').next().unwrap(), slow.trim_end_matches(')'), "{line}");
    }
}

#[test]
fn approximate() {
    assert!(example("approximate").contains("estimate:"));
}

#[test]
fn completion_check() {
    assert_eq!(example("completion_check").lines().count(), 3);
}

#[test]
fn gadgets() {
    let out = example("gadgets");
    assert_eq!(out.lines().filter(|l| l.contains("identity holds")).count(), 10);
}

#[test]
fn answers() {
    assert!(example("answers").contains("X = b: 3 valuations"));
}
