use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use super::objects::{inflate, parse_loose, ObjectKind};
use super::pack::{apply_delta, Pack, PackEntry};
use super::{CommitRecord, EntryKind, Oid, RepoAccess, TreeEntry};
use crate::error::{Error, Result};

const CACHE_LIMIT: usize = 4096;
const MAX_DELTA_CHAIN: usize = 10_000;

type Object = (ObjectKind, Arc<Vec<u8>>);

/// A repository on disk, read without shelling out to git.
pub struct GitRepo {
    git_dir: PathBuf,
    work_dir: Option<PathBuf>,
    packs: Vec<Pack>,
    // resolved pack objects by (pack, offset); delta bases are hit repeatedly
    cache: Mutex<HashMap<(usize, u64), Object>>,
}

fn corrupt(oid: &Oid, reason: impl Into<String>) -> Error {
    Error::CorruptObject {
        oid: oid.to_hex(),
        reason: reason.into(),
    }
}

impl GitRepo {
    /// Opens a working tree (with `.git` directory or gitfile) or a bare
    /// repository.
    pub fn open(path: impl AsRef<Path>) -> Result<GitRepo> {
        let path = path.as_ref();
        let not_repo = || Error::NotARepository(path.to_path_buf());
        let dot_git = path.join(".git");
        let (git_dir, work_dir) = if dot_git.is_dir() {
            (dot_git, Some(path.to_path_buf()))
        } else if dot_git.is_file() {
            let text = std::fs::read_to_string(&dot_git)?;
            let target = text
                .trim()
                .strip_prefix("gitdir:")
                .ok_or_else(not_repo)?
                .trim();
            (path.join(target), Some(path.to_path_buf()))
        } else if path.join("objects").is_dir() && path.join("HEAD").is_file() {
            (path.to_path_buf(), None)
        } else {
            return Err(not_repo());
        };
        let objects = common_dir(&git_dir).join("objects");
        if !objects.is_dir() {
            return Err(not_repo());
        }

        let mut packs = Vec::new();
        if let Ok(dir) = std::fs::read_dir(objects.join("pack")) {
            let mut idx: Vec<PathBuf> = dir
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "idx"))
                .collect();
            idx.sort();
            for p in idx {
                packs.push(Pack::open(&p).map_err(|reason| Error::CorruptObject {
                    oid: p.display().to_string(),
                    reason,
                })?);
            }
        }
        Ok(GitRepo {
            git_dir,
            work_dir,
            packs,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn git_dir(&self) -> &Path {
        &self.git_dir
    }

    pub fn work_dir(&self) -> Option<&Path> {
        self.work_dir.as_deref()
    }

    fn objects_dir(&self) -> PathBuf {
        common_dir(&self.git_dir).join("objects")
    }

    /// Reads any object by id.
    pub fn read_object(&self, oid: &Oid) -> Result<(ObjectKind, Arc<Vec<u8>>)> {
        let hex = oid.to_hex();
        let loose = self.objects_dir().join(&hex[..2]).join(&hex[2..]);
        match std::fs::read(&loose) {
            Ok(z) => {
                let raw = inflate(&z, z.len() * 2).map_err(|e| corrupt(oid, e.to_string()))?;
                let (kind, body) = parse_loose(&raw).map_err(|e| corrupt(oid, e))?;
                return Ok((kind, Arc::new(body)));
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::Io(e)),
        }
        for (i, pack) in self.packs.iter().enumerate() {
            if let Some(off) = pack.index.lookup(oid) {
                return self.read_packed(i, off, oid);
            }
        }
        Err(Error::MissingObject(hex))
    }

    fn read_packed(&self, pack: usize, offset: u64, oid: &Oid) -> Result<Object> {
        if let Some(hit) = self.cache_get(pack, offset) {
            return Ok(hit);
        }
        // walk the chain down to a whole object, then apply deltas back up
        let mut deltas: Vec<(u64, Vec<u8>)> = Vec::new();
        let mut cur = offset;
        let (kind, mut body) = loop {
            if let Some((k, b)) = self.cache_get(pack, cur) {
                break (k, b);
            }
            if deltas.len() > MAX_DELTA_CHAIN {
                return Err(corrupt(oid, "delta chain too long"));
            }
            match self.packs[pack].entry(cur).map_err(|e| corrupt(oid, e))? {
                PackEntry::Whole(k, b) => {
                    let b = Arc::new(b);
                    self.cache_put(pack, cur, (k, b.clone()));
                    break (k, b);
                }
                PackEntry::OfsDelta { base, delta } => {
                    deltas.push((cur, delta));
                    cur = base;
                }
                PackEntry::RefDelta { base, delta } => {
                    deltas.push((cur, delta));
                    let (k, b) = self.read_object(&base)?;
                    break (k, b);
                }
            }
        };
        for (at, delta) in deltas.into_iter().rev() {
            body = Arc::new(apply_delta(&body, &delta).map_err(|e| corrupt(oid, e))?);
            self.cache_put(pack, at, (kind, body.clone()));
        }
        Ok((kind, body))
    }

    fn cache_get(&self, pack: usize, offset: u64) -> Option<Object> {
        self.cache.lock().ok()?.get(&(pack, offset)).cloned()
    }

    fn cache_put(&self, pack: usize, offset: u64, obj: Object) {
        if let Ok(mut c) = self.cache.lock() {
            if c.len() >= CACHE_LIMIT {
                c.clear();
            }
            c.insert((pack, offset), obj);
        }
    }

    fn read_kind(&self, oid: &Oid, want: ObjectKind) -> Result<Arc<Vec<u8>>> {
        let (kind, body) = self.read_object(oid)?;
        if kind != want {
            return Err(corrupt(oid, format!("expected {want:?}, found {kind:?}")));
        }
        Ok(body)
    }

    /// Follows a ref name to an object id, through symbolic refs and
    /// packed-refs.
    fn read_ref(&self, name: &str, depth: usize) -> Result<Option<Oid>> {
        if depth > 8 {
            return Ok(None);
        }
        let dirs = [self.git_dir.clone(), common_dir(&self.git_dir)];
        for dir in &dirs {
            if let Ok(text) = std::fs::read_to_string(dir.join(name)) {
                let text = text.trim();
                if let Some(target) = text.strip_prefix("ref:") {
                    return self.read_ref(target.trim(), depth + 1);
                }
                if let Some(oid) = Oid::from_hex(text) {
                    return Ok(Some(oid));
                }
            }
        }
        if let Ok(text) = std::fs::read_to_string(common_dir(&self.git_dir).join("packed-refs")) {
            for line in text.lines() {
                if line.starts_with('#') || line.starts_with('^') {
                    continue;
                }
                if let Some((hex, refname)) = line.split_once(' ') {
                    if refname.trim() == name {
                        return Ok(Oid::from_hex(hex));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Dereferences annotated tags down to a commit.
    fn peel(&self, mut oid: Oid) -> Result<Oid> {
        for _ in 0..16 {
            let (kind, body) = self.read_object(&oid)?;
            match kind {
                ObjectKind::Commit => return Ok(oid),
                ObjectKind::Tag => {
                    let target = body
                        .split(|&b| b == b'\n')
                        .find_map(|l| l.strip_prefix(b"object "))
                        .and_then(|h| Oid::from_hex(std::str::from_utf8(h).ok()?))
                        .ok_or_else(|| corrupt(&oid, "tag without object"))?;
                    oid = target;
                }
                other => return Err(corrupt(&oid, format!("{other:?} is not a commit"))),
            }
        }
        Err(corrupt(&oid, "tag chain too long"))
    }

    /// Every object id in the packs, for prefix lookups and diagnostics.
    pub fn packed_object_count(&self) -> usize {
        self.packs.iter().map(|p| p.index.oids().len()).sum()
    }
}

/// Linked worktrees keep objects and shared refs in the main git dir.
fn common_dir(git_dir: &Path) -> PathBuf {
    match std::fs::read_to_string(git_dir.join("commondir")) {
        Ok(rel) => git_dir.join(rel.trim()),
        Err(_) => git_dir.to_path_buf(),
    }
}

pub(crate) fn parse_commit(oid: &Oid, body: &[u8]) -> Result<CommitRecord> {
    let mut tree = None;
    let mut parents = Vec::new();
    let mut time = 0i64;
    for line in body.split(|&b| b == b'\n') {
        if line.is_empty() {
            break;
        }
        let line = String::from_utf8_lossy(line);
        if let Some(h) = line.strip_prefix("tree ") {
            tree = Oid::from_hex(h);
        } else if let Some(h) = line.strip_prefix("parent ") {
            parents.push(Oid::from_hex(h).ok_or_else(|| corrupt(oid, "bad parent id"))?);
        } else if let Some(rest) = line.strip_prefix("committer ") {
            let mut fields = rest.rsplitn(3, ' ');
            let _tz = fields.next();
            time = fields
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| corrupt(oid, "bad committer time"))?;
        }
    }
    Ok(CommitRecord {
        oid: *oid,
        parents,
        tree: tree.ok_or_else(|| corrupt(oid, "commit without tree"))?,
        time,
    })
}

pub(crate) fn parse_tree(oid: &Oid, body: &[u8]) -> Result<Vec<TreeEntry>> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < body.len() {
        let sp = body[pos..]
            .iter()
            .position(|&b| b == b' ')
            .ok_or_else(|| corrupt(oid, "tree entry without mode"))?;
        let mode = std::str::from_utf8(&body[pos..pos + sp]).map_err(|_| corrupt(oid, "bad mode"))?;
        pos += sp + 1;
        let nul = body[pos..]
            .iter()
            .position(|&b| b == 0)
            .ok_or_else(|| corrupt(oid, "tree entry without name"))?;
        let name = String::from_utf8_lossy(&body[pos..pos + nul]).into_owned();
        pos += nul + 1;
        let id = body
            .get(pos..pos + 20)
            .ok_or_else(|| corrupt(oid, "truncated tree entry"))?;
        pos += 20;
        let kind = EntryKind::from_mode(mode).ok_or_else(|| corrupt(oid, format!("unknown mode {mode}")))?;
        out.push(TreeEntry {
            name,
            kind,
            oid: Oid(id.try_into().expect("20 bytes")),
        });
    }
    Ok(out)
}

impl RepoAccess for GitRepo {
    fn resolve_branch(&self, branch: &str) -> Result<Oid> {
        let candidates = if branch == "HEAD" || branch.starts_with("refs/") {
            vec![branch.to_string()]
        } else {
            vec![
                format!("refs/heads/{branch}"),
                format!("refs/tags/{branch}"),
                format!("refs/remotes/{branch}"),
            ]
        };
        for name in candidates {
            if let Some(oid) = self.read_ref(&name, 0)? {
                return self.peel(oid);
            }
        }
        Err(Error::MissingBranch(branch.to_string()))
    }

    fn commit(&self, oid: &Oid) -> Result<CommitRecord> {
        parse_commit(oid, &self.read_kind(oid, ObjectKind::Commit)?)
    }

    fn tree(&self, oid: &Oid) -> Result<Vec<TreeEntry>> {
        parse_tree(oid, &self.read_kind(oid, ObjectKind::Tree)?)
    }

    fn blob(&self, oid: &Oid) -> Result<Vec<u8>> {
        Ok(self.read_kind(oid, ObjectKind::Blob)?.as_ref().clone())
    }
}
