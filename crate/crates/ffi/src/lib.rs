//! C ABI over `quizlab`.
//!
//! Conventions:
//! - Every fallible call returns a [`QuizlabStatus`]; on failure the message
//!   is available from [`quizlab_last_error`] on the same thread.
//! - Rationals cross the boundary as parallel numerator/denominator arrays.
//! - Strings handed out by this library are owned by the caller and must be
//!   released with [`quizlab_string_free`].
//! - Family handles come from [`quizlab_family_new`] and are released with
//!   [`quizlab_family_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::ptr;

use quizlab::cli::CliError;
use quizlab::exact::Rational;
use quizlab::families::{expand_family, FamilyDescriptor};
use quizlab::identify::required_set_size;
use quizlab::kronecker::verify_lemma_identities;
use quizlab::protocol::{run_exact, Strategy};
use quizlab::witness::lower_bound_report;

/// Result codes. The nonzero values match the command-line exit codes where
/// both exist.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuizlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CapExceeded = 3,
    Internal = 4,
    InvalidUtf8 = 5,
}

/// Opaque family descriptor.
pub struct QuizlabFamily {
    desc: FamilyDescriptor,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: QuizlabStatus, msg: impl Into<String>) -> QuizlabStatus {
    set_error(msg);
    status
}

fn from_cli(e: CliError) -> QuizlabStatus {
    let status = match e {
        CliError::Usage(_) => QuizlabStatus::InvalidArgument,
        CliError::Cap(_) => QuizlabStatus::CapExceeded,
        CliError::Internal(_) => QuizlabStatus::Internal,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> QuizlabStatus) -> QuizlabStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(QuizlabStatus::Internal, "panic inside quizlab"),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, QuizlabStatus> {
    if s.is_null() {
        return Err(fail(QuizlabStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(QuizlabStatus::InvalidUtf8, "argument is not UTF-8"))
}

unsafe fn read_rationals(num: *const i64, den: *const i64, len: usize) -> Result<Vec<Rational>, QuizlabStatus> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if num.is_null() || den.is_null() {
        return Err(fail(QuizlabStatus::NullPointer, "null rational array"));
    }
    let (num, den) = (std::slice::from_raw_parts(num, len), std::slice::from_raw_parts(den, len));
    num.iter()
        .zip(den)
        .map(|(&n, &d)| {
            if d == 0 {
                Err(fail(QuizlabStatus::InvalidArgument, "zero denominator"))
            } else {
                Ok(Rational::new(n, d))
            }
        })
        .collect()
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> QuizlabStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            QuizlabStatus::Ok
        }
        Err(_) => fail(QuizlabStatus::Internal, "output contains a NUL byte"),
    }
}

unsafe fn family_ref<'a>(f: *const QuizlabFamily) -> Result<&'a FamilyDescriptor, QuizlabStatus> {
    f.as_ref().map(|f| &f.desc).ok_or_else(|| fail(QuizlabStatus::NullPointer, "null family handle"))
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! lib {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return from_cli(e.into()),
        }
    };
}

/// Library version string, statically allocated.
#[no_mangle]
pub extern "C" fn quizlab_version() -> *const c_char {
    concat!("quizlab ", env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn quizlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` is NULL or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn quizlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build a family from its JSON descriptor, e.g.
/// `{"variant":"univariate-d","d":2,"task":"identity"}`.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn quizlab_family_new(json: *const c_char, out: *mut *mut QuizlabFamily) -> QuizlabStatus {
    guard(|| {
        if out.is_null() {
            return fail(QuizlabStatus::NullPointer, "null output pointer");
        }
        let text = tri!(read_str(json));
        let parsed: FamilyDescriptor = match serde_json::from_str(text) {
            Ok(d) => d,
            Err(e) => return fail(QuizlabStatus::InvalidArgument, format!("bad family descriptor: {e}")),
        };
        let desc = lib!(FamilyDescriptor::new(parsed.variant, parsed.task));
        *out = Box::into_raw(Box::new(QuizlabFamily { desc }));
        QuizlabStatus::Ok
    })
}

/// # Safety
/// `family` is NULL or a handle from [`quizlab_family_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn quizlab_family_free(family: *mut QuizlabFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Number of parameters, or 0 for a NULL handle.
///
/// # Safety
/// `family` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn quizlab_family_param_arity(family: *const QuizlabFamily) -> usize {
    family.as_ref().map_or(0, |f| f.desc.param_arity())
}

/// Number of variables of the task image, or 0 for a NULL handle.
///
/// # Safety
/// `family` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn quizlab_family_output_arity(family: *const QuizlabFamily) -> usize {
    family.as_ref().map_or(0, |f| f.desc.output_arity())
}

/// Expand the task image at a parameter point; writes the polynomial as JSON.
///
/// # Safety
/// `family` is a live handle, `num`/`den` hold `len` values, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn quizlab_family_expand(
    family: *const QuizlabFamily,
    num: *const i64,
    den: *const i64,
    len: usize,
    cap: usize,
    out: *mut *mut c_char,
) -> QuizlabStatus {
    guard(|| {
        if out.is_null() {
            return fail(QuizlabStatus::NullPointer, "null output pointer");
        }
        let desc = tri!(family_ref(family));
        let u = tri!(read_rationals(num, den, len));
        let p = lib!(expand_family(desc, &u, cap));
        let json = serde_json::json!({ "text": p.to_string(), "polynomial": p });
        write_string(out, json.to_string())
    })
}

/// Evaluate the task image at parameters `u` and point `x`; writes the value
/// as `"n/d"`.
///
/// # Safety
/// Array pointers hold the stated number of values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn quizlab_family_eval(
    family: *const QuizlabFamily,
    u_num: *const i64,
    u_den: *const i64,
    u_len: usize,
    x_num: *const i64,
    x_den: *const i64,
    x_len: usize,
    out: *mut *mut c_char,
) -> QuizlabStatus {
    guard(|| {
        if out.is_null() {
            return fail(QuizlabStatus::NullPointer, "null output pointer");
        }
        let desc = tri!(family_ref(family));
        let u = tri!(read_rationals(u_num, u_den, u_len));
        let x = tri!(read_rationals(x_num, x_den, x_len));
        if x.len() != desc.output_arity() {
            return fail(QuizlabStatus::InvalidArgument, format!("expected {} coordinates", desc.output_arity()));
        }
        let p = lib!(expand_family(desc, &u, quizlab::circuit::DEFAULT_EXPANSION_CAP));
        match p.evaluate(&x) {
            Ok(v) => write_string(out, v.to_fraction_string()),
            Err(e) => fail(QuizlabStatus::Internal, e.to_string()),
        }
    })
}

/// Run seeded rank trials for the family; writes the report as JSON.
///
/// # Safety
/// `family` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn quizlab_witness_report(
    family: *const QuizlabFamily,
    trials: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> QuizlabStatus {
    guard(|| {
        if out.is_null() {
            return fail(QuizlabStatus::NullPointer, "null output pointer");
        }
        let desc = tri!(family_ref(family));
        let mut report = lib!(lower_bound_report(desc, trials, seed));
        report.elapsed_ms = None;
        write_string(out, serde_json::to_string(&report).expect("reports serialize"))
    })
}

/// Play the exact game against hidden parameters with the built-in strategy;
/// writes the transcript as JSON, redacted when `quizmaster_export` is nonzero.
///
/// # Safety
/// `num`/`den` hold `len` values; `family` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn quizlab_game_exact(
    family: *const QuizlabFamily,
    num: *const i64,
    den: *const i64,
    len: usize,
    seed: u64,
    quizmaster_export: c_int,
    out: *mut *mut c_char,
) -> QuizlabStatus {
    guard(|| {
        if out.is_null() {
            return fail(QuizlabStatus::NullPointer, "null output pointer");
        }
        let desc = tri!(family_ref(family));
        let hidden = tri!(read_rationals(num, den, len));
        let strategy = lib!(Strategy::builtin(desc, seed));
        let mut t = lib!(run_exact(desc, &strategy, &hidden));
        if quizmaster_export != 0 {
            t = t.quizmaster_export();
        }
        write_string(out, t.to_json())
    })
}

/// Check the three Kronecker identities at `(s, u)`; bit `i` of `mask` is set
/// when identity `i + 1` holds.
///
/// # Safety
/// `u_num`/`u_den` hold `k` values; `mask` is writable.
#[no_mangle]
pub unsafe extern "C" fn quizlab_kron_verify(
    k: usize,
    s_num: i64,
    s_den: i64,
    u_num: *const i64,
    u_den: *const i64,
    mask: *mut u32,
) -> QuizlabStatus {
    guard(|| {
        if mask.is_null() {
            return fail(QuizlabStatus::NullPointer, "null output pointer");
        }
        if s_den == 0 {
            return fail(QuizlabStatus::InvalidArgument, "zero denominator");
        }
        let u = tri!(read_rationals(u_num, u_den, k));
        let (a, b, c) = lib!(verify_lemma_identities(k, &Rational::new(s_num, s_den), &u));
        *mask = a as u32 | (b as u32) << 1 | (c as u32) << 2;
        QuizlabStatus::Ok
    })
}

/// Required sampling-set size as a decimal string.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn quizlab_required_set_size(delta: u64, l: u32, k: u64, out: *mut *mut c_char) -> QuizlabStatus {
    guard(|| {
        if out.is_null() {
            return fail(QuizlabStatus::NullPointer, "null output pointer");
        }
        let n = lib!(required_set_size(delta, l, k));
        write_string(out, n.to_string())
    })
}

/// Run a command line as the `quizlab` binary would (without the program
/// name) and return its exit code. Either output pointer may be NULL.
///
/// # Safety
/// `argv` holds `argc` NUL-terminated strings; non-NULL outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn quizlab_run(
    argc: usize,
    argv: *const *const c_char,
    out_stdout: *mut *mut c_char,
    out_stderr: *mut *mut c_char,
) -> c_int {
    let mut args = vec!["quizlab".to_string()];
    if argc > 0 {
        if argv.is_null() {
            set_error("null argv");
            return QuizlabStatus::NullPointer as c_int;
        }
        for &a in std::slice::from_raw_parts(argv, argc) {
            match read_str(a) {
                Ok(s) => args.push(s.to_string()),
                Err(s) => return s as c_int,
            }
        }
    }
    let outcome = match std::panic::catch_unwind(|| quizlab::cli::dispatch(args)) {
        Ok(o) => o,
        Err(_) => {
            set_error("panic inside quizlab");
            return QuizlabStatus::Internal as c_int;
        }
    };
    for (ptr, text) in [(out_stdout, outcome.stdout), (out_stderr, outcome.stderr)] {
        if !ptr.is_null() && write_string(ptr, text) != QuizlabStatus::Ok {
            return QuizlabStatus::Internal as c_int;
        }
    }
    outcome.code
}
