use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use quizlab_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { quizlab_string_free(s) };
    text
}

fn family(json: &str) -> *mut QuizlabFamily {
    let c = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { quizlab_family_new(c.as_ptr(), &mut out) }, QuizlabStatus::Ok);
    out
}

fn last_error() -> String {
    let p = quizlab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(quizlab_version()) }.to_str().unwrap();
    assert_eq!(v, format!("quizlab {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn family_lifecycle() {
    let f = family(r#"{"variant":"easy-power-sum","l":1,"n":2,"task":"identity"}"#);
    unsafe {
        assert_eq!(quizlab_family_param_arity(f), 3);
        assert_eq!(quizlab_family_output_arity(f), 2);
        let (num, den) = ([1i64, 2, 3], [1i64, 1, 1]);
        let mut out = ptr::null_mut();
        assert_eq!(quizlab_family_expand(f, num.as_ptr(), den.as_ptr(), 3, 1000, &mut out), QuizlabStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["polynomial"]["variables"], 2);
        let (x, xd) = ([1i64, 1], [1i64, 1]);
        assert_eq!(
            quizlab_family_eval(f, num.as_ptr(), den.as_ptr(), 3, x.as_ptr(), xd.as_ptr(), 2, &mut out),
            QuizlabStatus::Ok
        );
        // t·(1 + 2X1 + 3X2) at X = (1, 1) with t = 1
        assert_eq!(take(out), "6/1");
        quizlab_family_free(f);
        assert_eq!(quizlab_family_param_arity(ptr::null()), 0);
    }
}

#[test]
fn error_codes() {
    let mut out = ptr::null_mut();
    unsafe {
        let bad = CString::new(r#"{"variant":"univariate-d","d":0,"task":"identity"}"#).unwrap();
        assert_eq!(quizlab_family_new(bad.as_ptr(), &mut out), QuizlabStatus::InvalidArgument);
        assert!(last_error().contains("D >= 1"));
        let junk = CString::new("{").unwrap();
        assert_eq!(quizlab_family_new(junk.as_ptr(), &mut out), QuizlabStatus::InvalidArgument);
        assert_eq!(quizlab_family_new(ptr::null(), &mut out), QuizlabStatus::NullPointer);

        let f = family(r#"{"variant":"easy-power-sum","l":3,"n":3,"task":"identity"}"#);
        let (num, den) = ([1i64, 2, 3, 4], [1i64; 4]);
        let mut s = ptr::null_mut();
        assert_eq!(quizlab_family_expand(f, num.as_ptr(), den.as_ptr(), 4, 5, &mut s), QuizlabStatus::CapExceeded);
        let zero = [0i64; 4];
        assert_eq!(quizlab_family_expand(f, num.as_ptr(), zero.as_ptr(), 4, 5, &mut s), QuizlabStatus::InvalidArgument);
        quizlab_family_free(f);

        let (big, big_den) = ([1i64; 9], [1i64; 9]);
        let mut mask = 0u32;
        assert_eq!(quizlab_kron_verify(9, 1, 1, big.as_ptr(), big_den.as_ptr(), &mut mask), QuizlabStatus::CapExceeded);
    }
}

#[test]
fn game_and_witness() {
    let f = family(r#"{"variant":"univariate-d","d":2,"task":"identity"}"#);
    unsafe {
        let (num, den) = ([2i64], [1i64]);
        let mut out = ptr::null_mut();
        assert_eq!(quizlab_game_exact(f, num.as_ptr(), den.as_ptr(), 1, 0, 0, &mut out), QuizlabStatus::Ok);
        let audit: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(audit["verdict"], "accept");
        assert!(audit.get("hidden").is_some());
        assert_eq!(quizlab_game_exact(f, num.as_ptr(), den.as_ptr(), 1, 0, 1, &mut out), QuizlabStatus::Ok);
        let redacted: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert!(redacted.get("hidden").is_none());
        assert_eq!(quizlab_witness_report(f, 3, 7, &mut out), QuizlabStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(report["expected_rank"], 3);
        assert_eq!(report["success_count"], 3);
        quizlab_family_free(f);
    }
}

#[test]
fn kronecker_and_set_size() {
    let (u, ud) = ([2i64, -3, 5], [1i64, 1, 7]);
    let mut mask = 0;
    unsafe {
        assert_eq!(quizlab_kron_verify(3, 1, 2, u.as_ptr(), ud.as_ptr(), &mut mask), QuizlabStatus::Ok);
        assert_eq!(mask, 0b111);
        let mut out = ptr::null_mut();
        assert_eq!(quizlab_required_set_size(2, 2, 4, &mut out), QuizlabStatus::Ok);
        assert_eq!(take(out), "125");
        assert_eq!(quizlab_required_set_size(1, 2, 4, &mut out), QuizlabStatus::InvalidArgument);
    }
}

#[test]
fn command_line_passthrough() {
    let args: Vec<CString> = ["kron", "verify", "--k", "3", "--seed", "1"].iter().map(|a| CString::new(*a).unwrap()).collect();
    let argv: Vec<*const c_char> = args.iter().map(|a| a.as_ptr()).collect();
    let (mut out, mut err) = (ptr::null_mut(), ptr::null_mut());
    let code = unsafe { quizlab_run(argv.len(), argv.as_ptr(), &mut out, &mut err) };
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["result"]["identities"], serde_json::json!([true, true, true]));
    assert_eq!(take(err), "");
    let bad = [CString::new("nonsense").unwrap()];
    let argv = [bad[0].as_ptr()];
    assert_eq!(unsafe { quizlab_run(1, argv.as_ptr(), ptr::null_mut(), ptr::null_mut()) }, 2);
}

#[test]
fn header_declares_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/quizlab.h")).unwrap();
    for name in [
        "QUIZLAB_STATUS_CAP_EXCEEDED = 3",
        "typedef struct QuizlabFamily QuizlabFamily;",
        "quizlab_family_new(",
        "quizlab_family_free(",
        "quizlab_string_free(",
        "quizlab_last_error(",
        "quizlab_run(",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

fn static_lib() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    let lib = deps.parent()?.join("libquizlab_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not found next to the test binary; skipping");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("quizlab_smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "exit {:?}: {stdout}", out.status.code());
    assert!(stdout.contains("accept=1 mask=7"));
}
