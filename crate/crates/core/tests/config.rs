use qlab::harness::config::{LadderSpec, RunConfig, Suite};
use qlab::harness::report::ReportTable;
use qlab::Error;

#[test]
fn ladder_forms() {
    assert_eq!(LadderSpec::parse("8,16,32").unwrap().values().unwrap(), vec![8, 16, 32]);
    assert_eq!(LadderSpec::parse("8..32:8").unwrap().values().unwrap(), vec![8, 16, 24, 32]);
}

#[test]
fn ladders_must_increase() {
    for bad in ["32,16", "8,8", "0,4"] {
        let r = LadderSpec::parse(bad).and_then(|l| l.values());
        assert!(matches!(r, Err(Error::Config(_))), "{bad} accepted");
    }
    let r = RunConfig::from_json(r#"{"suite":"projector","ladder":[16,8]}"#);
    assert!(matches!(r, Err(Error::Config(_))));
}

#[test]
fn rejects_unknown_and_nonpositive() {
    assert!(matches!(RunConfig::from_json(r#"{"suite":"star","bogus":1}"#), Err(Error::Config(_))));
    assert!(matches!(RunConfig::from_json(r#"{"suite":"star","tolerances":{"floor":0.0}}"#), Err(Error::Config(_))));
    assert!(matches!(RunConfig::from_json(r#"{"suite":"star","workers":0}"#), Err(Error::Config(_))));
}

#[test]
fn defaults_fill_in() {
    let c = RunConfig::from_json(r#"{"suite":"toeplitz"}"#).unwrap();
    assert_eq!(c.suite, Suite::Toeplitz);
    assert_eq!(c.ladder(), Suite::Toeplitz.default_ladder());
    assert!(c.selected("anything"));
}

#[test]
fn empty_table_is_header_only() {
    let t = ReportTable::new("empty", &["k", "value"]);
    assert_eq!(t.to_csv().unwrap(), "k,value\n");
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        RunConfig::load(&e.unwrap().path()).unwrap();
        n += 1;
    }
    assert_eq!(n, 12);
}
