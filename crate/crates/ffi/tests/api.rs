use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use qlab_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = qlab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(src: &str) -> *mut QlabSymbol {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qlab_symbol_parse(cstr(src).as_ptr(), &mut out) }, QlabStatus::Ok);
    out
}

#[test]
fn star_through_handles() {
    unsafe {
        let z = parse("symbol n=1 r=1\n(0, [1], [0], [[1]])\n");
        let zb = parse("symbol n=1 r=1\n(0, [0], [1], [[1]])\n");
        let h = parse("symbol n=1 r=1\n(1, [0], [0], [[1]])\n");
        let mut p = ptr::null_mut();
        assert_eq!(qlab_symbol_star(z, zb, &mut p), QlabStatus::Ok);
        let mut eq = false;
        assert_eq!(qlab_symbol_equal(p, h, &mut eq), QlabStatus::Ok);
        assert!(eq);
        let mut s = ptr::null_mut();
        assert_eq!(qlab_symbol_to_string(p, &mut s), QlabStatus::Ok);
        let text = CStr::from_ptr(s).to_string_lossy().into_owned();
        qlab_string_free(s);
        let back = parse(&text);
        assert_eq!(qlab_symbol_equal(back, h, &mut eq), QlabStatus::Ok);
        assert!(eq);
        for x in [z, zb, h, p, back] {
            qlab_symbol_free(x);
        }
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(qlab_symbol_parse(cstr("symbol n=x").as_ptr(), &mut out), QlabStatus::Parse);
        assert!(out.is_null());
        assert!(last_error().contains("parse"));
        assert_eq!(qlab_symbol_parse(ptr::null(), &mut out), QlabStatus::NullArgument);
        let mut cfg = ptr::null_mut();
        let bad = cstr(r#"{"suite":"projector","ladder":[16,8]}"#);
        assert_eq!(qlab_config_from_json(bad.as_ptr(), &mut cfg), QlabStatus::Config);
        assert!(cfg.is_null());
        let bytes = [0xffu8, 0];
        assert_eq!(qlab_config_from_json(bytes.as_ptr().cast(), &mut cfg), QlabStatus::InvalidUtf8);
        let mut passed = false;
        assert_eq!(qlab_summary_passed(ptr::null(), &mut passed), QlabStatus::NullArgument);
    }
}

#[test]
fn run_suite_and_guard() {
    unsafe {
        let h = qlab_harness_new();
        let mut cfg = ptr::null_mut();
        assert_eq!(qlab_config_from_json(cstr(r#"{"suite":"star"}"#).as_ptr(), &mut cfg), QlabStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(qlab_run(h, cfg, &mut s), QlabStatus::Ok);
        let mut passed = false;
        assert_eq!(qlab_summary_passed(s, &mut passed), QlabStatus::Ok);
        assert!(passed);
        let (mut total, mut failed) = (0usize, 1usize);
        assert_eq!(qlab_summary_counts(s, &mut total, &mut failed), QlabStatus::Ok);
        assert!(total >= 6);
        assert_eq!(failed, 0);
        let mut text = ptr::null_mut();
        assert_eq!(qlab_summary_render(s, false, &mut text), QlabStatus::Ok);
        assert!(CStr::from_ptr(text).to_string_lossy().ends_with("verdict: pass\n"));
        qlab_string_free(text);
        assert_eq!(qlab_summary_render(s, true, &mut text), QlabStatus::Ok);
        assert!(CStr::from_ptr(text).to_string_lossy().contains("\"passed\": true"));
        qlab_string_free(text);
        qlab_summary_free(s);
        qlab_config_free(cfg);

        let guarded = cstr(r#"{"suite":"projector","models":["torus"],"ladder":[8],"grid":{"max_nodes":50}}"#);
        assert_eq!(qlab_config_from_json(guarded.as_ptr(), &mut cfg), QlabStatus::Ok);
        assert_eq!(qlab_run(h, cfg, &mut s), QlabStatus::GridGuard);
        assert!(s.is_null());
        assert!(last_error().contains("guard"));
        qlab_config_free(cfg);
        qlab_harness_free(h);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(qlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/qlab.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["qlab_run", "qlab_symbol_star", "qlab_last_error", "QLAB_STATUS_GRID_GUARD"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("t.c");
    std::fs::write(&src, format!("#include \"{header}\"\nint main(void) {{ return qlab_version() == 0; }}\n")).unwrap();
    match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).status() {
        Ok(s) => assert!(s.success()),
        Err(_) => eprintln!("no C compiler; syntax check skipped"),
    }
}
