#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

pub fn git(dir: &Path, args: &[&str]) -> String {
    git_env(dir, args, &[])
}

pub fn git_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> String {
    let out = Command::new("git")
        .current_dir(dir)
        .args(["-c", "user.name=Test", "-c", "user.email=test@example.com", "-c", "commit.gpgsign=false"])
        .args(args)
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("HOME", dir)
        .envs(env.iter().copied())
        .output()
        .expect("git runs");
    assert!(out.status.success(), "git {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("utf-8 git output")
}

pub fn write(dir: &Path, path: &str, content: &str) {
    let full = dir.join(path);
    std::fs::create_dir_all(full.parent().unwrap()).unwrap();
    std::fs::write(full, content).unwrap();
}

pub fn commit(dir: &Path, msg: &str, time: i64) {
    git(dir, &["add", "-A"]);
    let date = format!("{time} +0000");
    git_env(
        dir,
        &["commit", "-q", "--allow-empty", "-m", msg],
        &[("GIT_AUTHOR_DATE", &date), ("GIT_COMMITTER_DATE", &date)],
    );
}

/// A repository whose history grows one large file, so repacking yields
/// delta chains. It has a side branch with a merge, an annotated tag, a
/// binary file, a symlink and a few loose commits after the last repack.
pub fn sample_repo(dir: &Path) {
    git(dir, &["init", "-q", "-b", "main"]);
    let mut big = String::new();
    let mut t = 1_700_000_000;
    for i in 0..12 {
        for j in 0..40 {
            big.push_str(&format!("fn handler{i}x{j}(request: HttpRequest) -> Response {{ todo!() }}\n"));
        }
        write(dir, "src/server.rs", &big);
        write(dir, &format!("docs/note{i}.md"), &format!("Release note {i}\n\tindented line\n"));
        if i == 3 {
            std::fs::write(dir.join("image.bin"), b"GIF89a\0\x01\x02binary").unwrap();
            #[cfg(unix)]
            std::os::unix::fs::symlink("src/server.rs", dir.join("server-link")).unwrap();
        }
        if i == 6 {
            std::fs::remove_file(dir.join("docs/note0.md")).unwrap();
        }
        t += 100;
        commit(dir, &format!("step {i}"), t);
    }
    git(dir, &["tag", "-a", "v1", "-m", "release"]);
    git(dir, &["checkout", "-q", "-b", "side", "HEAD~3"]);
    write(dir, "src/side.py", "class SideCar:\n    def parse_http_request(self):\n        pass\n");
    t += 100;
    commit(dir, "side work", t);
    git(dir, &["checkout", "-q", "main"]);
    t += 100;
    git_env(
        dir,
        &["merge", "-q", "--no-ff", "-m", "merge side", "side"],
        &[("GIT_AUTHOR_DATE", &format!("{t} +0000")), ("GIT_COMMITTER_DATE", &format!("{t} +0000"))],
    );
    git(dir, &["gc", "-q", "--aggressive"]);
    for i in 0..3 {
        write(dir, "src/loose.rs", &format!("pub fn looseCommit{i}() {{}}\n"));
        t += 100;
        commit(dir, &format!("loose {i}"), t);
    }
}

pub fn rev_list(dir: &Path, rev: &str) -> Vec<String> {
    git(dir, &["rev-list", rev]).lines().map(str::to_string).collect()
}
