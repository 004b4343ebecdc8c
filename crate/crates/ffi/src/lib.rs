//! C ABI over the `vclosure` toolkit.
//!
//! Subgroups are passed around as opaque `VclSubgroup` handles created by
//! `vcl_subgroup_new` and released with `vcl_subgroup_free`. Every fallible
//! call returns a `VclStatus`; on failure a description is available from
//! `vcl_last_error_message` until the next call on the same thread. Strings
//! returned through out-parameters are owned by the caller and must be
//! released with `vcl_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use vclosure::closure::{is_retract, vcl, ClosureStatus, RetractVerdict};
use vclosure::{Error, SubgroupGraph, Word};

/// Result codes shared by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VclStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    BudgetExceeded = 5,
    FringeTooLarge = 6,
    Inconsistency = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VclVerdict {
    Yes = 0,
    No = 1,
    Unknown = 2,
}

/// A finitely generated subgroup of a free group.
pub struct VclSubgroup {
    graph: SubgroupGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> VclStatus {
    match e {
        Error::InvalidLetter { .. } | Error::Parse { .. } => VclStatus::Parse,
        Error::BudgetExceeded { .. } => VclStatus::BudgetExceeded,
        Error::FringeTooLarge { .. } => VclStatus::FringeTooLarge,
        Error::Inconsistency(_) => VclStatus::Inconsistency,
        _ => VclStatus::InvalidArgument,
    }
}

struct Failure(VclStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> VclStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => VclStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            VclStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(VclStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(VclStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a>(p: *const VclSubgroup) -> Result<&'a VclSubgroup, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(VclStatus::NullPointer, "null subgroup handle".into()))
}

fn non_null<T>(p: *mut T) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(VclStatus::NullPointer, "null output pointer".into()))
    } else {
        Ok(())
    }
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s).expect("JSON and DOT output contain no nul bytes").into_raw()
}

fn boxed(graph: SubgroupGraph) -> *mut VclSubgroup {
    Box::into_raw(Box::new(VclSubgroup { graph }))
}

/// Folds the subgroup of the rank-`rank` free group generated by the
/// comma-separated words in `gens` (letters `a..z`, inverses `A..Z`).
///
/// # Safety
/// `gens` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vcl_subgroup_new(rank: u32, gens: *const c_char, out: *mut *mut VclSubgroup) -> VclStatus {
    guard(|| {
        non_null(out)?;
        let gens = text(gens)?;
        let r = rank as usize;
        let words = gens
            .split(',')
            .map(|g| Word::parse(g, r))
            .collect::<Result<Vec<_>, _>>()?;
        let graph = SubgroupGraph::fold(&words, r)?;
        *out = boxed(graph);
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn vcl_subgroup_free(h: *mut VclSubgroup) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Rank of the subgroup (size of a free basis), or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vcl_subgroup_rank(h: *const VclSubgroup) -> usize {
    h.as_ref().map_or(0, |h| h.graph.rank())
}

/// # Safety
/// `h` must be a live handle, `word` a valid C string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vcl_subgroup_contains(h: *const VclSubgroup, word: *const c_char, out: *mut bool) -> VclStatus {
    guard(|| {
        non_null(out)?;
        let h = handle(h)?;
        let w = Word::parse(text(word)?, h.graph.ambient_rank())?;
        *out = h.graph.contains(&w);
        Ok(())
    })
}

/// Whether `k` is a subgroup of `h`.
///
/// # Safety
/// `h` and `k` must be live handles, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vcl_subgroup_includes(h: *const VclSubgroup, k: *const VclSubgroup, out: *mut bool) -> VclStatus {
    guard(|| {
        non_null(out)?;
        *out = handle(h)?.graph.includes(&handle(k)?.graph)?;
        Ok(())
    })
}

/// # Safety
/// `h` and `k` must be live handles, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vcl_subgroup_intersect(
    h: *const VclSubgroup,
    k: *const VclSubgroup,
    out: *mut *mut VclSubgroup,
) -> VclStatus {
    guard(|| {
        non_null(out)?;
        let graph = handle(h)?.graph.intersect(&handle(k)?.graph)?;
        *out = boxed(graph);
        Ok(())
    })
}

/// Free basis as a JSON array of words.
///
/// # Safety
/// `h` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vcl_subgroup_basis_json(h: *const VclSubgroup, out: *mut *mut c_char) -> VclStatus {
    guard(|| {
        non_null(out)?;
        let basis: Vec<String> = handle(h)?.graph.basis().generators.iter().map(|w| w.to_string()).collect();
        *out = to_c(serde_json::to_string(&basis).expect("serializable"));
        Ok(())
    })
}

/// Subgroup graph in Graphviz DOT.
///
/// # Safety
/// `h` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vcl_subgroup_to_dot(h: *const VclSubgroup, out: *mut *mut c_char) -> VclStatus {
    guard(|| {
        non_null(out)?;
        *out = to_c(handle(h)?.graph.to_dot());
        Ok(())
    })
}

/// Decides whether `h` is a retract, searching words of length at most
/// `bound` when no exact criterion applies. If `json` is not null it
/// receives the verdict with its witness or certificate.
///
/// # Safety
/// `h` must be a live handle, `verdict` a valid pointer, `json` null or valid.
#[no_mangle]
pub unsafe extern "C" fn vcl_is_retract(
    h: *const VclSubgroup,
    bound: u32,
    verdict: *mut VclVerdict,
    json: *mut *mut c_char,
) -> VclStatus {
    guard(|| {
        non_null(verdict)?;
        let v = is_retract(&handle(h)?.graph, bound as usize)?;
        *verdict = match v {
            RetractVerdict::Yes { .. } => VclVerdict::Yes,
            RetractVerdict::No { .. } => VclVerdict::No,
            RetractVerdict::Unknown { .. } => VclVerdict::Unknown,
        };
        if !json.is_null() {
            *json = to_c(v.to_json(bound as usize).to_string());
        }
        Ok(())
    })
}

/// Smallest retract containing `h`. `exact` is set to false when some
/// smaller candidate could not be decided within `bound`.
///
/// # Safety
/// `h` must be a live handle, `out` and `exact` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn vcl_closure(
    h: *const VclSubgroup,
    bound: u32,
    out: *mut *mut VclSubgroup,
    exact: *mut bool,
) -> VclStatus {
    guard(|| {
        non_null(out)?;
        non_null(exact)?;
        let result = vcl(&handle(h)?.graph, bound as usize)?;
        *exact = result.status == ClosureStatus::Exact;
        *out = boxed(result.closure);
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vcl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn vcl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
