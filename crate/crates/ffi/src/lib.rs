//! C ABI for the mixsec compiler and checkers.
//!
//! Every entry point returns a [`MixsecStatus`]. On failure a message is kept
//! per thread and can be read with [`mixsec_last_error`]. Objects are handed
//! out as opaque pointers and must be released with the matching `_free`
//! function. Strings returned through out-parameters are owned by the caller
//! and released with [`mixsec_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mixsec::compiler::{compile, AnnotatedJson, Compiled};
use mixsec::corpus::{check_expectations, verify, CheckKind, Entry, VerifyOptions};
use mixsec::lang::parse_cmd;
use mixsec::model::Policy;

/// Result codes shared by every function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixsecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidPolicy = 3,
    ParseError = 4,
    /// The compiler rejected the program.
    Rejected = 5,
    Io = 6,
    /// A check found a violation or a verdict differs from the manifest.
    Violated = 7,
    InvalidArgument = 8,
    Internal = 9,
}

/// A validated classification policy.
pub struct MixsecPolicy {
    inner: Policy,
}

/// A compiled thread: the RISC program plus its annotations.
pub struct MixsecCompiled {
    inner: Compiled,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(MixsecStatus, String);

fn fail(status: MixsecStatus, msg: impl ToString) -> Fail {
    Fail(status, msg.to_string())
}

/// Runs `f`, recording its error message and turning panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<MixsecStatus, Fail>) -> MixsecStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            MixsecStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(MixsecStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MixsecStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

unsafe fn write_out<T>(out: *mut *mut T, value: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(fail(MixsecStatus::NullPointer, "output pointer is null"));
    }
    *out = value;
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn mixsec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mixsec_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mixsec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a policy document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mixsec_policy_from_json(json: *const c_char, out: *mut *mut MixsecPolicy) -> MixsecStatus {
    guard(|| {
        let text = read_str(json, "policy JSON")?;
        let inner = Policy::from_json(text).map_err(|e| fail(MixsecStatus::InvalidPolicy, e))?;
        let violations = inner.check_lock_discipline();
        if let Some(v) = violations.first() {
            return Err(fail(MixsecStatus::InvalidPolicy, format!("lock discipline: {v}")));
        }
        write_out(out, Box::into_raw(Box::new(MixsecPolicy { inner })))?;
        Ok(MixsecStatus::Ok)
    })
}

/// Releases a policy. Null is ignored.
///
/// # Safety
/// `policy` must come from [`mixsec_policy_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mixsec_policy_free(policy: *mut MixsecPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

/// Compiles one thread. `registers` of 0 selects the default register count.
/// Returns `MIXSEC_STATUS_REJECTED` when the stability checks fail.
///
/// # Safety
/// `policy` must be a live policy, `source` a NUL-terminated string and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mixsec_compile(
    policy: *const MixsecPolicy,
    source: *const c_char,
    registers: usize,
    out: *mut *mut MixsecCompiled,
) -> MixsecStatus {
    guard(|| {
        let policy = policy
            .as_ref()
            .ok_or_else(|| fail(MixsecStatus::NullPointer, "policy is null"))?;
        let src = read_str(source, "source")?;
        let cmd = parse_cmd(src).map_err(|e| fail(MixsecStatus::ParseError, e))?;
        let registers = if registers == 0 {
            mixsec::risc::DEFAULT_REGISTERS
        } else {
            registers
        };
        let inner = compile(&cmd, &policy.inner, registers).map_err(|e| fail(MixsecStatus::Rejected, e))?;
        write_out(out, Box::into_raw(Box::new(MixsecCompiled { inner })))?;
        Ok(MixsecStatus::Ok)
    })
}

/// Number of instructions in the compiled program, or 0 for null.
///
/// # Safety
/// `compiled` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mixsec_compiled_len(compiled: *const MixsecCompiled) -> usize {
    compiled.as_ref().map_or(0, |c| c.inner.program.len())
}

/// Writes the assembly listing to `out`; free it with [`mixsec_string_free`].
///
/// # Safety
/// `compiled` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mixsec_compiled_listing(
    compiled: *const MixsecCompiled,
    out: *mut *mut c_char,
) -> MixsecStatus {
    guard(|| {
        let c = compiled
            .as_ref()
            .ok_or_else(|| fail(MixsecStatus::NullPointer, "compiled program is null"))?;
        write_out(out, to_c(c.inner.program.listing()))?;
        Ok(MixsecStatus::Ok)
    })
}

/// Writes the annotated JSON form (instructions with their records) to `out`.
///
/// # Safety
/// `compiled` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mixsec_compiled_json(compiled: *const MixsecCompiled, out: *mut *mut c_char) -> MixsecStatus {
    guard(|| {
        let c = compiled
            .as_ref()
            .ok_or_else(|| fail(MixsecStatus::NullPointer, "compiled program is null"))?;
        let json = AnnotatedJson::from_output(&c.inner.output, c.inner.registers).to_json_string();
        write_out(out, to_c(json))?;
        Ok(MixsecStatus::Ok)
    })
}

/// Releases a compiled program. Null is ignored.
///
/// # Safety
/// `compiled` must come from [`mixsec_compile`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mixsec_compiled_free(compiled: *mut MixsecCompiled) {
    if !compiled.is_null() {
        drop(Box::from_raw(compiled));
    }
}

/// Runs checks on a corpus entry directory and writes the reports as a JSON
/// array to `out`. `checks` is a comma-separated list of check names, or null
/// for all of them. Returns `MIXSEC_STATUS_VIOLATED` when any report is
/// violated; the reports are written either way.
///
/// # Safety
/// `entry_dir` must be a NUL-terminated path, `checks` null or a
/// NUL-terminated string, and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mixsec_verify_entry(
    entry_dir: *const c_char,
    checks: *const c_char,
    out: *mut *mut c_char,
) -> MixsecStatus {
    guard(|| {
        let dir = read_str(entry_dir, "entry directory")?;
        let kinds = if checks.is_null() {
            CheckKind::ALL.to_vec()
        } else {
            parse_checks(read_str(checks, "check list")?)?
        };
        if out.is_null() {
            return Err(fail(MixsecStatus::NullPointer, "output pointer is null"));
        }
        let entry = Entry::load(Path::new(dir)).map_err(|e| fail(MixsecStatus::Io, e))?;
        let reports = verify(&entry, &kinds, &VerifyOptions::default()).map_err(|e| fail(MixsecStatus::Rejected, e))?;
        let json = serde_json::to_string_pretty(&reports).map_err(|e| fail(MixsecStatus::Internal, e))?;
        write_out(out, to_c(json))?;
        if reports.iter().all(|r| r.is_ok()) {
            Ok(MixsecStatus::Ok)
        } else {
            set_error("at least one check reported a violation");
            Ok(MixsecStatus::Violated)
        }
    })
}

/// Runs every check on a corpus entry and compares the verdicts with its
/// manifest. Returns `MIXSEC_STATUS_VIOLATED` on any mismatch.
///
/// # Safety
/// `entry_dir` must be a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn mixsec_check_entry(entry_dir: *const c_char) -> MixsecStatus {
    guard(|| {
        let dir = read_str(entry_dir, "entry directory")?;
        let entry = Entry::load(Path::new(dir)).map_err(|e| fail(MixsecStatus::Io, e))?;
        let compiled = entry.compile(mixsec::risc::DEFAULT_REGISTERS);
        match (entry.expects_accept(), compiled) {
            (true, Err(e)) => return Err(fail(MixsecStatus::Violated, format!("expected acceptance: {e}"))),
            (false, Ok(_)) => return Err(fail(MixsecStatus::Violated, "expected rejection, compiled")),
            (false, Err(e)) => {
                let want_stability = entry.manifest.compile.reason.as_deref() == Some("stability");
                if want_stability && !e.error.is_stability() {
                    return Err(fail(
                        MixsecStatus::Violated,
                        format!("rejected for the wrong reason: {e}"),
                    ));
                }
                return Ok(MixsecStatus::Ok);
            }
            (true, Ok(_)) => {}
        }
        let reports =
            verify(&entry, &CheckKind::ALL, &VerifyOptions::default()).map_err(|e| fail(MixsecStatus::Internal, e))?;
        let mismatches = check_expectations(&entry, &reports);
        if mismatches.is_empty() {
            Ok(MixsecStatus::Ok)
        } else {
            let lines: Vec<String> = mismatches.iter().map(ToString::to_string).collect();
            Err(fail(MixsecStatus::Violated, lines.join("; ")))
        }
    })
}

fn parse_checks(list: &str) -> Result<Vec<CheckKind>, Fail> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<CheckKind>()
                .map_err(|e| fail(MixsecStatus::InvalidArgument, e))
        })
        .collect()
}
