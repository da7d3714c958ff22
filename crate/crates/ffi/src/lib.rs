//! C interface to the masp library.
//!
//! Programs and answer-set results are opaque handles created and freed by
//! this library. Every fallible call returns a `MaspStatus`; on failure the
//! message is kept per thread and read with `masp_last_error`. Strings handed
//! out are owned by the caller and released with `masp_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use masp::ast::ModularProgram;
use masp::equivalence::{self, EquivOptions};
use masp::eval::{self, Interpretation, SolveOptions};
use masp::{cli, parser, sm, Error};

/// Result code of every fallible call.
#[repr(u32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaspStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Precondition = 4,
    Domain = 5,
    Resource = 6,
    Index = 7,
    Internal = 8,
}

/// A parsed modular program.
pub struct MaspProgram {
    inner: ModularProgram,
}

/// The answer sets of one solve call.
pub struct MaspAnswerSets {
    sets: Vec<Interpretation>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: MaspStatus, msg: impl Into<String>) -> MaspStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> MaspStatus {
    let status = match &e {
        Error::Parse(_) | Error::Ast(_) => MaspStatus::Parse,
        Error::Precondition(_) | Error::Io { .. } => MaspStatus::Precondition,
        Error::Domain(_) => MaspStatus::Domain,
        Error::Resource(_) => MaspStatus::Resource,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning a panic into `Internal`.
fn guard(f: impl FnOnce() -> MaspStatus) -> MaspStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(MaspStatus::Internal, "internal error"),
    }
}

/// # Safety
/// `s` is null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, MaspStatus> {
    if s.is_null() {
        return Err(fail(MaspStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(MaspStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `out` is null or valid for one pointer write.
unsafe fn write_string(out: *mut *mut c_char, s: String) -> MaspStatus {
    if out.is_null() {
        return fail(MaspStatus::NullArgument, "output pointer is null");
    }
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            MaspStatus::Ok
        }
        Err(_) => fail(MaspStatus::Internal, "string contains NUL"),
    }
}

/// # Safety
/// `p` is null or a handle from `masp_program_parse`.
unsafe fn program<'a>(p: *const MaspProgram, what: &str) -> Result<&'a ModularProgram, MaspStatus> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| fail(MaspStatus::NullArgument, format!("{what} is null")))
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn masp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The message of the last failed call on this thread, or null. The caller
/// frees the copy with `masp_string_free`.
#[no_mangle]
pub extern "C" fn masp_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn masp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses program text into a new handle.
///
/// # Safety
/// `source` is a NUL-terminated string; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn masp_program_parse(source: *const c_char, out: *mut *mut MaspProgram) -> MaspStatus {
    guard(|| {
        let src = match read_str(source, "source") {
            Ok(s) => s,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(MaspStatus::NullArgument, "output pointer is null");
        }
        match parser::parse_program(src) {
            Ok((p, _)) => {
                *out = Box::into_raw(Box::new(MaspProgram { inner: p }));
                MaspStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a program handle. Null is ignored.
///
/// # Safety
/// `p` is null or a handle from `masp_program_parse` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn masp_program_free(p: *mut MaspProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Adds the facts in `instance` as a top-level def-module, keeping the
/// program's public symbols.
///
/// # Safety
/// `p` is a live handle; `instance` is a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn masp_program_join_instance(p: *mut MaspProgram, instance: *const c_char) -> MaspStatus {
    guard(|| {
        let Some(h) = p.as_mut() else { return fail(MaspStatus::NullArgument, "program is null") };
        let facts = match read_str(instance, "instance") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match parser::parse_instance(facts) {
            Ok(e) => {
                h.inner = eval::join(&h.inner, &e, None);
                MaspStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Canonical program text.
///
/// # Safety
/// `p` is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn masp_program_print(p: *const MaspProgram, out: *mut *mut c_char) -> MaspStatus {
    guard(|| match program(p, "program") {
        Ok(q) => write_string(out, parser::print_program(q)),
        Err(s) => s,
    })
}

/// The second-order formula of the program.
///
/// # Safety
/// `p` is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn masp_program_formula(p: *const MaspProgram, out: *mut *mut c_char) -> MaspStatus {
    guard(|| match program(p, "program") {
        Ok(q) => match sm::phi(q) {
            Ok(f) => write_string(out, f.to_string()),
            Err(e) => from_error(e),
        },
        Err(s) => s,
    })
}

/// Computes the answer sets over the program's Herbrand universe.
///
/// # Safety
/// `p` is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn masp_solve(p: *const MaspProgram, out: *mut *mut MaspAnswerSets) -> MaspStatus {
    guard(|| {
        let q = match program(p, "program") {
            Ok(q) => q,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(MaspStatus::NullArgument, "output pointer is null");
        }
        match eval::answer_sets(q, &SolveOptions::default()) {
            Ok(sets) => {
                *out = Box::into_raw(Box::new(MaspAnswerSets { sets }));
                MaspStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of answer sets; 0 for null.
///
/// # Safety
/// `r` is null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn masp_answer_sets_count(r: *const MaspAnswerSets) -> usize {
    r.as_ref().map_or(0, |r| r.sets.len())
}

/// The atoms of answer set `index`, space separated.
///
/// # Safety
/// `r` is a live result handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn masp_answer_sets_get(r: *const MaspAnswerSets, index: usize, out: *mut *mut c_char) -> MaspStatus {
    guard(|| {
        let Some(r) = r.as_ref() else { return fail(MaspStatus::NullArgument, "result is null") };
        match r.sets.get(index) {
            Some(i) => write_string(out, i.to_string()),
            None => fail(MaspStatus::Index, format!("index {index} out of range for {} answer sets", r.sets.len())),
        }
    })
}

/// All answer sets as a JSON array of arrays of atom strings.
///
/// # Safety
/// `r` is a live result handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn masp_answer_sets_json(r: *const MaspAnswerSets, out: *mut *mut c_char) -> MaspStatus {
    guard(|| {
        let Some(r) = r.as_ref() else { return fail(MaspStatus::NullArgument, "result is null") };
        let rows: Vec<Vec<String>> = r.sets.iter().map(|i| i.atom_strings()).collect();
        match serde_json::to_string(&rows) {
            Ok(s) => write_string(out, s),
            Err(e) => fail(MaspStatus::Internal, e.to_string()),
        }
    })
}

/// Releases a result handle. Null is ignored.
///
/// # Safety
/// `r` is null or a handle from `masp_solve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn masp_answer_sets_free(r: *mut MaspAnswerSets) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Bounded strong equivalence of two programs. `domain` is a comma-separated
/// constant list, or null for the programs' constants. Writes whether they
/// agree on every interpretation, and the verdict text.
///
/// # Safety
/// `a`, `b` are live handles; `domain` is null or NUL-terminated;
/// `equivalent` and `verdict` are valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn masp_equiv(
    a: *const MaspProgram,
    b: *const MaspProgram,
    domain: *const c_char,
    equivalent: *mut bool,
    verdict: *mut *mut c_char,
) -> MaspStatus {
    guard(|| {
        let (x, y) = match (program(a, "first program"), program(b, "second program")) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        if equivalent.is_null() {
            return fail(MaspStatus::NullArgument, "output pointer is null");
        }
        let dom = if domain.is_null() {
            equivalence::default_bound(&[x, y])
        } else {
            match read_str(domain, "domain").map(cli::parse_domain_bound) {
                Ok(Ok(d)) => d,
                Ok(Err(e)) => return from_error(e),
                Err(s) => return s,
            }
        };
        match equivalence::strong_equiv_bounded(x, y, &[], &dom, &EquivOptions::default()) {
            Ok(v) => {
                *equivalent = v.is_equivalent();
                write_string(verdict, v.to_string())
            }
            Err(e) => from_error(e),
        }
    })
}
