use std::fs;
use std::process::Command;

fn qlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qlab"))
}

#[test]
fn bad_ladder_is_a_config_error() {
    let out = qlab().args(["build-projector", "--k", "32,16"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn grid_guard_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("guard.json");
    fs::write(&cfg, r#"{"suite":"projector","models":["torus"],"ladder":[8],"grid":{"max_nodes":100}}"#).unwrap();
    let out = qlab().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn failing_assertion_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.json");
    fs::write(&cfg, r#"{"suite":"laplace","checks":["remainder"],"tolerances":{"expansion_slope":1e-9}}"#).unwrap();
    let out = qlab().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict: fail"));
}

#[test]
fn star_run_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = qlab().args(["star", "--out"]).arg(d.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&out.stdout).contains("verdict: pass"));
    }
    for name in ["star.csv", "star-witness.csv", "summary.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs between runs");
    }
}

#[test]
fn seed_changes_samples() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    qlab().args(["star", "--seed", "1", "--out"]).arg(a.path()).output().unwrap();
    qlab().args(["star", "--seed", "2", "--out"]).arg(b.path()).output().unwrap();
    assert_ne!(fs::read(a.path().join("star.csv")).unwrap(), fs::read(b.path().join("star.csv")).unwrap());
}
