use std::ffi::{c_char, CStr, CString};
use std::fs;
use std::ptr;

use tgix_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { tgix_string_free(s) };
    out
}

fn last_error() -> String {
    let p = tgix_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn open_memory() -> *mut TgixEngine {
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { tgix_open_in_memory(&mut e) }, TgixStatus::Ok);
    e
}

#[test]
fn commit_search_checkout_round_trip() {
    let e = open_memory();
    let work = tempfile::tempdir().unwrap();
    fs::write(work.path().join("a.rs"), "fn parseHttpRequest() {}\n").unwrap();

    let mut rev1 = u64::MAX;
    let dir = cstr(work.path().to_str().unwrap());
    assert_eq!(unsafe { tgix_commit_dir(e, dir.as_ptr(), &mut rev1) }, TgixStatus::Ok);

    fs::write(work.path().join("b.rs"), "fn other() {}\n").unwrap();
    let mut rev2 = u64::MAX;
    assert_eq!(unsafe { tgix_commit_dir(e, dir.as_ptr(), &mut rev2) }, TgixStatus::Ok);
    assert_ne!(rev1, rev2);

    let mut active = 0;
    assert_eq!(unsafe { tgix_active_revision(e, &mut active) }, TgixStatus::Ok);
    assert_eq!(active, rev2);

    let mut out = ptr::null_mut();
    let pat = cstr("other");
    assert_eq!(
        unsafe { tgix_search_json(e, pat.as_ptr(), 10, dir.as_ptr(), &mut out) },
        TgixStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["results"][0]["path"], "b.rs");

    let mut mutations = 0;
    assert_eq!(unsafe { tgix_checkout(e, rev1, &mut mutations) }, TgixStatus::Ok);
    assert!(mutations > 0);

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { tgix_search_json(e, pat.as_ptr(), 10, dir.as_ptr(), &mut out) },
        TgixStatus::NoMatch
    );
    take(out);

    let mut out = ptr::null_mut();
    let sym = cstr("PHR");
    assert_eq!(unsafe { tgix_symbol_json(e, sym.as_ptr(), 5, &mut out) }, TgixStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v[0]["symbol"]["name"], "parseHttpRequest");

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { tgix_stats_json(e, 3, &mut out) }, TgixStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    // Empty root plus two commits.
    assert_eq!(v["revisions"], 3);

    unsafe { tgix_close(e) };
}

#[test]
fn errors_map_to_status_codes() {
    let e = open_memory();
    let mut rev = 0;
    assert_eq!(unsafe { tgix_active_revision(e, &mut rev) }, TgixStatus::NoActiveRevision);

    assert_eq!(unsafe { tgix_checkout(e, 99, ptr::null_mut()) }, TgixStatus::UnknownRevision);
    assert!(last_error().contains("99"));

    let spec = cstr("12345");
    assert_eq!(unsafe { tgix_resolve(e, spec.as_ptr(), &mut rev) }, TgixStatus::UnknownRevision);

    assert_eq!(unsafe { tgix_resolve(e, ptr::null(), &mut rev) }, TgixStatus::InvalidArgument);
    assert!(last_error().contains("spec"));

    assert_eq!(unsafe { tgix_checkout(ptr::null(), 0, ptr::null_mut()) }, TgixStatus::InvalidArgument);

    let missing = tempfile::tempdir().unwrap();
    let repo = cstr(missing.path().to_str().unwrap());
    let branch = cstr("HEAD");
    assert_eq!(
        unsafe { tgix_index_git(e, repo.as_ptr(), branch.as_ptr(), ptr::null_mut()) },
        TgixStatus::NotARepository
    );

    unsafe {
        tgix_close(e);
        tgix_close(ptr::null_mut());
        tgix_string_free(ptr::null_mut());
    }
}

#[test]
fn on_disk_store_persists() {
    let store = tempfile::tempdir().unwrap();
    let work = tempfile::tempdir().unwrap();
    fs::write(work.path().join("x.txt"), "persisted text\n").unwrap();
    let sdir = cstr(store.path().to_str().unwrap());
    let wdir = cstr(work.path().to_str().unwrap());

    let mut e = ptr::null_mut();
    assert_eq!(unsafe { tgix_open(sdir.as_ptr(), &mut e) }, TgixStatus::Ok);
    let mut rev = 0;
    assert_eq!(unsafe { tgix_commit_dir(e, wdir.as_ptr(), &mut rev) }, TgixStatus::Ok);
    unsafe { tgix_close(e) };

    let mut e = ptr::null_mut();
    assert_eq!(unsafe { tgix_open(sdir.as_ptr(), &mut e) }, TgixStatus::Ok);
    let mut active = u64::MAX;
    assert_eq!(unsafe { tgix_active_revision(e, &mut active) }, TgixStatus::Ok);
    assert_eq!(active, rev);
    let spec = cstr(&rev.to_string());
    let mut resolved = u64::MAX;
    assert_eq!(unsafe { tgix_resolve(e, spec.as_ptr(), &mut resolved) }, TgixStatus::Ok);
    assert_eq!(resolved, rev);
    unsafe { tgix_close(e) };
}

#[test]
fn header_declares_every_entry_point() {
    let header = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/tgix.h")).unwrap();
    for name in [
        "tgix_open(",
        "tgix_open_in_memory(",
        "tgix_close(",
        "tgix_index_git(",
        "tgix_resolve(",
        "tgix_checkout(",
        "tgix_commit_dir(",
        "tgix_active_revision(",
        "tgix_search_json(",
        "tgix_symbol_json(",
        "tgix_stats_json(",
        "tgix_last_error(",
        "tgix_string_free(",
        "typedef struct TgixEngine TgixEngine;",
        "TGIX_STATUS_UNKNOWN_REVISION = 3",
        "TGIX_STATUS_NO_MATCH = 1",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
