mod common;

use std::path::Path;
use std::process::{Command, Output};

fn tgix(store: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tgix"))
        .arg("--store")
        .arg(store)
        .args(args)
        .env_remove("TGIX_STORE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn index_search_checkout_and_exit_codes() {
    let repo = tempfile::tempdir().unwrap();
    common::sample_repo(repo.path());
    let store = tempfile::tempdir().unwrap();
    let s = store.path();
    let repo_path = repo.path().to_str().unwrap();

    let o = tgix(s, &["index", repo_path, "--branch", "main", "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stats: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let commits = common::rev_list(repo.path(), "main");
    assert_eq!(stats["commits_seen"], commits.len());

    let o = tgix(s, &["search", "looseCommit2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "src/loose.rs:1:8\n");

    let o = tgix(s, &["search", "definitely absent text"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).is_empty());

    // The first commit predates the loose commits.
    let first = commits.last().unwrap();
    let o = tgix(s, &["checkout", &first[..8]]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(tgix(s, &["search", "looseCommit"]).status.code(), Some(1));

    let o = tgix(s, &["checkout", "0", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(report["to"], 0);

    assert_eq!(tgix(s, &["checkout", "999999"]).status.code(), Some(3));
    assert_eq!(tgix(s, &["checkout", "abcdef0123"]).status.code(), Some(3));

    let o = tgix(s, &["checkout", &commits[0]]);
    assert_eq!(o.status.code(), Some(0));
    let o = tgix(s, &["symbol", "SC", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let first_hit: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(first_hit["symbol"]["name"], "SideCar");
    assert_eq!(tgix(s, &["symbol", "Zqx"]).status.code(), Some(1));

    let o = tgix(s, &["bench-checkout", "--pairs", "5", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("delta_trigrams,millis"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 6);
    assert!(csv.contains("# r_squared="));

    let o = tgix(s, &["stats", "--json"]);
    let st: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(st["revisions"], commits.len());
}

#[test]
fn commit_worktree_and_search_it() {
    let work = tempfile::tempdir().unwrap();
    let store = tempfile::tempdir().unwrap();
    let s = store.path();
    common::write(work.path(), "a.txt", "alpha\tbeta\n");
    let o = tgix(s, &["commit", work.path().to_str().unwrap(), "--json"]);
    assert!(o.status.success());
    let out: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(out["file_ops"], 1);

    // TAB and SPACE are interchangeable in patterns.
    let o = tgix(s, &["search", "alpha beta", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let row: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!((row["path"].as_str(), row["line"].as_u64(), row["column"].as_u64()), (Some("a.txt"), Some(1), Some(1)));
}

#[test]
fn bench_needs_two_revisions_and_bad_repo_fails() {
    let store = tempfile::tempdir().unwrap();
    let o = tgix(store.path(), &["bench-checkout"]);
    assert_eq!(o.status.code(), Some(2));
    let empty = tempfile::tempdir().unwrap();
    let o = tgix(store.path(), &["index", empty.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
