//! Read-only access to git repositories.
//!
//! [`GitRepo`] reads the on-disk object store directly (loose objects and
//! packfiles). [`MemoryRepo`] holds synthetic histories for tests. Both
//! implement [`RepoAccess`], which is all ingestion needs.

mod objects;
mod pack;
mod repo;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};

pub use objects::ObjectKind;
pub use repo::GitRepo;

/// SHA-1 object id.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Oid(pub [u8; 20]);

impl Oid {
    pub fn from_hex(s: &str) -> Option<Oid> {
        let mut out = [0u8; 20];
        hex::decode_to_slice(s.trim(), &mut out).ok()?;
        Some(Oid(out))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Display for Oid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Oid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Oid({})", &self.to_hex()[..12])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitRecord {
    pub oid: Oid,
    pub parents: Vec<Oid>,
    pub tree: Oid,
    /// Committer time, seconds since the epoch.
    pub time: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryKind {
    Tree,
    /// Regular or executable file.
    Blob,
    Symlink,
    Gitlink,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeEntry {
    pub name: String,
    pub kind: EntryKind,
    pub oid: Oid,
}

impl EntryKind {
    pub fn from_mode(mode: &str) -> Option<EntryKind> {
        Some(match mode {
            "40000" | "040000" => EntryKind::Tree,
            "100644" | "100755" | "100664" => EntryKind::Blob,
            "120000" => EntryKind::Symlink,
            "160000" => EntryKind::Gitlink,
            _ => return None,
        })
    }
}

/// What ingestion needs from a repository.
pub trait RepoAccess {
    /// Commit at the tip of `branch` (a short branch name, a full ref, or
    /// `HEAD`).
    fn resolve_branch(&self, branch: &str) -> Result<Oid>;
    fn commit(&self, oid: &Oid) -> Result<CommitRecord>;
    fn tree(&self, oid: &Oid) -> Result<Vec<TreeEntry>>;
    fn blob(&self, oid: &Oid) -> Result<Vec<u8>>;
}

/// Every regular file under `tree`, by full path.
pub fn list_files(repo: &dyn RepoAccess, tree: &Oid) -> Result<BTreeMap<String, Oid>> {
    fn walk(
        repo: &dyn RepoAccess,
        tree: &Oid,
        prefix: &str,
        out: &mut BTreeMap<String, Oid>,
    ) -> Result<()> {
        for e in repo.tree(tree)? {
            let path = format!("{prefix}{}", e.name);
            match e.kind {
                EntryKind::Tree => walk(repo, &e.oid, &format!("{path}/"), out)?,
                EntryKind::Blob => {
                    out.insert(path, e.oid);
                }
                EntryKind::Symlink | EntryKind::Gitlink => {}
            }
        }
        Ok(())
    }
    let mut out = BTreeMap::new();
    walk(repo, tree, "", &mut out)?;
    Ok(out)
}

/// A changed regular file between two trees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileChange {
    pub path: String,
    pub old: Option<Oid>,
    pub new: Option<Oid>,
}

/// Regular files that differ between `old` and `new`, in path order.
/// Identical subtrees are skipped without being read.
pub fn diff_trees(repo: &dyn RepoAccess, old: Option<&Oid>, new: Option<&Oid>) -> Result<Vec<FileChange>> {
    fn entries(repo: &dyn RepoAccess, t: Option<&Oid>) -> Result<BTreeMap<String, (EntryKind, Oid)>> {
        Ok(match t {
            None => BTreeMap::new(),
            Some(t) => repo
                .tree(t)?
                .into_iter()
                .map(|e| (e.name, (e.kind, e.oid)))
                .collect(),
        })
    }
    fn walk(
        repo: &dyn RepoAccess,
        old: Option<&Oid>,
        new: Option<&Oid>,
        prefix: &str,
        out: &mut Vec<FileChange>,
    ) -> Result<()> {
        if old == new {
            return Ok(());
        }
        let a = entries(repo, old)?;
        let b = entries(repo, new)?;
        let names: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
        for name in names {
            let path = format!("{prefix}{name}");
            let (ea, eb) = (a.get(name), b.get(name));
            if ea == eb {
                continue;
            }
            let pick = |e: Option<&(EntryKind, Oid)>, kind: EntryKind| {
                e.filter(|(k, _)| *k == kind).map(|(_, o)| *o)
            };
            let (ta, tb) = (pick(ea, EntryKind::Tree), pick(eb, EntryKind::Tree));
            if ta.is_some() || tb.is_some() {
                walk(repo, ta.as_ref(), tb.as_ref(), &format!("{path}/"), out)?;
            }
            let (fa, fb) = (pick(ea, EntryKind::Blob), pick(eb, EntryKind::Blob));
            if fa != fb {
                out.push(FileChange {
                    path,
                    old: fa,
                    new: fb,
                });
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(repo, old, new, "", &mut out)?;
    // a file and a directory of the same name sort differently once '/' is appended
    out.sort_by(|x, y| x.path.cmp(&y.path));
    Ok(out)
}

/// Synthetic repository: each commit is a flat path → content map.
#[derive(Debug, Default)]
pub struct MemoryRepo {
    commits: HashMap<Oid, CommitRecord>,
    trees: HashMap<Oid, Vec<TreeEntry>>,
    blobs: HashMap<Oid, Vec<u8>>,
    blob_ids: HashMap<Vec<u8>, Oid>,
    branches: HashMap<String, Oid>,
    counter: u64,
}

impl MemoryRepo {
    pub fn new() -> Self {
        Self::default()
    }

    fn fresh_oid(&mut self, tag: u8) -> Oid {
        self.counter += 1;
        let mut b = [0u8; 20];
        b[0] = tag;
        b[12..].copy_from_slice(&self.counter.to_be_bytes());
        Oid(b)
    }

    fn put_tree(&mut self, files: &BTreeMap<String, Vec<u8>>) -> Oid {
        // group by first path component
        let mut groups: BTreeMap<String, BTreeMap<String, Vec<u8>>> = BTreeMap::new();
        let mut entries = Vec::new();
        for (path, content) in files {
            match path.split_once('/') {
                Some((dir, rest)) => {
                    groups
                        .entry(dir.to_string())
                        .or_default()
                        .insert(rest.to_string(), content.clone());
                }
                None => {
                    let oid = match self.blob_ids.get(content) {
                        Some(&oid) => oid,
                        None => {
                            let oid = self.fresh_oid(b'b');
                            self.blob_ids.insert(content.clone(), oid);
                            self.blobs.insert(oid, content.clone());
                            oid
                        }
                    };
                    entries.push(TreeEntry {
                        name: path.clone(),
                        kind: EntryKind::Blob,
                        oid,
                    });
                }
            }
        }
        for (dir, sub) in groups {
            let oid = self.put_tree(&sub);
            entries.push(TreeEntry {
                name: dir,
                kind: EntryKind::Tree,
                oid,
            });
        }
        let oid = self.fresh_oid(b't');
        self.trees.insert(oid, entries);
        oid
    }

    /// Adds a commit with the given parents and full file contents.
    pub fn add_commit(&mut self, parents: &[Oid], time: i64, files: &BTreeMap<String, Vec<u8>>) -> Oid {
        let tree = self.put_tree(files);
        let oid = self.fresh_oid(b'c');
        self.commits.insert(
            oid,
            CommitRecord {
                oid,
                parents: parents.to_vec(),
                tree,
                time,
            },
        );
        oid
    }

    pub fn set_branch(&mut self, name: &str, oid: Oid) {
        self.branches.insert(name.to_string(), oid);
    }
}

impl RepoAccess for MemoryRepo {
    fn resolve_branch(&self, branch: &str) -> Result<Oid> {
        self.branches
            .get(branch)
            .copied()
            .ok_or_else(|| Error::MissingBranch(branch.to_string()))
    }

    fn commit(&self, oid: &Oid) -> Result<CommitRecord> {
        self.commits
            .get(oid)
            .cloned()
            .ok_or_else(|| Error::MissingObject(oid.to_hex()))
    }

    fn tree(&self, oid: &Oid) -> Result<Vec<TreeEntry>> {
        self.trees
            .get(oid)
            .cloned()
            .ok_or_else(|| Error::MissingObject(oid.to_hex()))
    }

    fn blob(&self, oid: &Oid) -> Result<Vec<u8>> {
        self.blobs
            .get(oid)
            .cloned()
            .ok_or_else(|| Error::MissingObject(oid.to_hex()))
    }
}
