//! C ABI for the tgix engine.
//!
//! Every function returns a [`TgixStatus`]. On failure the message is kept
//! per thread and can be read with [`tgix_last_error`]. Strings handed out
//! by the library must be released with [`tgix_string_free`]; engines with
//! [`tgix_close`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use tgix::engine::Engine;
use tgix::revision_tree::RevisionId;
use tgix::Error;

/// Opaque engine handle.
pub struct TgixEngine {
    inner: Engine,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TgixStatus {
    Ok = 0,
    /// The query ran but found nothing.
    NoMatch = 1,
    Error = 2,
    UnknownRevision = 3,
    InvalidArgument = 4,
    Io = 5,
    Corrupt = 6,
    NoActiveRevision = 7,
    NotARepository = 8,
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> TgixStatus {
    match e {
        Error::UnknownRevision(_) | Error::UnresolvedRevision(_) => TgixStatus::UnknownRevision,
        Error::Io(_) => TgixStatus::Io,
        Error::CorruptStore(_)
        | Error::CorruptDelta(_)
        | Error::DeltaFormat(_)
        | Error::CorruptObject { .. } => TgixStatus::Corrupt,
        Error::NoActiveRevision => TgixStatus::NoActiveRevision,
        Error::NotARepository(_) | Error::MissingBranch(_) => TgixStatus::NotARepository,
        Error::InvalidPattern(_) => TgixStatus::InvalidArgument,
        _ => TgixStatus::Error,
    }
}

struct Failure(TgixStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(TgixStatus::InvalidArgument, msg.to_string())
}

/// Runs `body`, converting errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<TgixStatus, Failure>) -> TgixStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TgixStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(s: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(invalid(&format!("{name} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(&format!("{name} is not UTF-8")))
}

/// # Safety
/// `e` must be null or a handle from `tgix_open*` that was not closed.
unsafe fn handle<'a>(e: *const TgixEngine) -> Result<&'a Engine, Failure> {
    e.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| invalid("engine is null"))
}

fn out_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    let c = CString::new(s).map_err(|_| invalid("output contains NUL"))?;
    // SAFETY: checked non-null; the caller provides a writable slot.
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn json(value: &impl serde::Serialize) -> Result<String, Failure> {
    serde_json::to_string(value).map_err(|e| Failure(TgixStatus::Error, e.to_string()))
}

/// Opens (creating if needed) the index stored in directory `dir`.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tgix_open(dir: *const c_char, out: *mut *mut TgixEngine) -> TgixStatus {
    guard(|| {
        let dir = str_arg(dir, "dir")?;
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let inner = Engine::open(dir)?;
        *out = Box::into_raw(Box::new(TgixEngine { inner }));
        Ok(TgixStatus::Ok)
    })
}

/// Opens a volatile in-memory index.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tgix_open_in_memory(out: *mut *mut TgixEngine) -> TgixStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        *out = Box::into_raw(Box::new(TgixEngine {
            inner: Engine::in_memory(),
        }));
        Ok(TgixStatus::Ok)
    })
}

/// Releases an engine. Null is ignored.
///
/// # Safety
/// `engine` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tgix_close(engine: *mut TgixEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Ingests `branch` of the repository at `repo`. Ingestion statistics are
/// written to `out_json` when it is not null.
///
/// # Safety
/// Pointers must be valid; `out_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn tgix_index_git(
    engine: *const TgixEngine,
    repo: *const c_char,
    branch: *const c_char,
    out_json: *mut *mut c_char,
) -> TgixStatus {
    guard(|| {
        let e = handle(engine)?;
        let stats = e.index_git(Path::new(str_arg(repo, "repo")?), str_arg(branch, "branch")?)?;
        if !out_json.is_null() {
            out_string(out_json, json(&stats)?)?;
        }
        Ok(TgixStatus::Ok)
    })
}

/// Resolves a revision id or commit-id prefix.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tgix_resolve(
    engine: *const TgixEngine,
    spec: *const c_char,
    out_revision: *mut u64,
) -> TgixStatus {
    guard(|| {
        let e = handle(engine)?;
        if out_revision.is_null() {
            return Err(invalid("output pointer is null"));
        }
        *out_revision = e.resolve(str_arg(spec, "spec")?)?.0;
        Ok(TgixStatus::Ok)
    })
}

/// Makes `revision` active. The number of posting mutations is written to
/// `out_mutations` when it is not null.
///
/// # Safety
/// `engine` must be valid; `out_mutations` may be null.
#[no_mangle]
pub unsafe extern "C" fn tgix_checkout(
    engine: *const TgixEngine,
    revision: u64,
    out_mutations: *mut u64,
) -> TgixStatus {
    guard(|| {
        let e = handle(engine)?;
        let report = e.checkout(RevisionId(revision))?;
        if !out_mutations.is_null() {
            *out_mutations = report.stats.posting_mutations;
        }
        Ok(TgixStatus::Ok)
    })
}

/// Commits the directory `worktree` on top of the active revision.
///
/// # Safety
/// Pointers must be valid; `out_revision` may be null.
#[no_mangle]
pub unsafe extern "C" fn tgix_commit_dir(
    engine: *const TgixEngine,
    worktree: *const c_char,
    out_revision: *mut u64,
) -> TgixStatus {
    guard(|| {
        let e = handle(engine)?;
        let outcome = e.commit_dir(Path::new(str_arg(worktree, "worktree")?))?;
        if !out_revision.is_null() {
            *out_revision = outcome.revision.0;
        }
        Ok(TgixStatus::Ok)
    })
}

/// Writes the active revision to `out_revision`, or returns
/// `NoActiveRevision` for an empty index.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tgix_active_revision(
    engine: *const TgixEngine,
    out_revision: *mut u64,
) -> TgixStatus {
    guard(|| {
        let e = handle(engine)?;
        if out_revision.is_null() {
            return Err(invalid("output pointer is null"));
        }
        let rev = e.active_revision()?.ok_or(Error::NoActiveRevision)?;
        *out_revision = rev.0;
        Ok(TgixStatus::Ok)
    })
}

/// Full-text search. Writes `{"results":[...],"truncated":...}` to
/// `out_json`; returns `NoMatch` when nothing was found. `worktree` may be
/// null.
///
/// # Safety
/// Pointers must be valid; `worktree` may be null.
#[no_mangle]
pub unsafe extern "C" fn tgix_search_json(
    engine: *const TgixEngine,
    pattern: *const c_char,
    limit: usize,
    worktree: *const c_char,
    out_json: *mut *mut c_char,
) -> TgixStatus {
    guard(|| {
        let e = handle(engine)?;
        let worktree = if worktree.is_null() {
            None
        } else {
            Some(Path::new(str_arg(worktree, "worktree")?))
        };
        let outcome = e.search(str_arg(pattern, "pattern")?, limit, worktree)?;
        out_string(out_json, json(&outcome)?)?;
        Ok(if outcome.results.is_empty() {
            TgixStatus::NoMatch
        } else {
            TgixStatus::Ok
        })
    })
}

/// CamelHump symbol search. Writes a JSON array of ranked matches.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tgix_symbol_json(
    engine: *const TgixEngine,
    pattern: *const c_char,
    limit: usize,
    out_json: *mut *mut c_char,
) -> TgixStatus {
    guard(|| {
        let e = handle(engine)?;
        let matches = e.symbols(str_arg(pattern, "pattern")?, limit)?;
        out_string(out_json, json(&matches)?)?;
        Ok(if matches.is_empty() {
            TgixStatus::NoMatch
        } else {
            TgixStatus::Ok
        })
    })
}

/// Index statistics as a JSON object.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tgix_stats_json(
    engine: *const TgixEngine,
    top_k: usize,
    out_json: *mut *mut c_char,
) -> TgixStatus {
    guard(|| {
        let e = handle(engine)?;
        out_string(out_json, json(&e.stats(top_k)?)?)?;
        Ok(TgixStatus::Ok)
    })
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tgix_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn tgix_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
