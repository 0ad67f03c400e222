//! Git history ingestion.
//!
//! Commits reachable from a branch are visited in topological order (ties by
//! commit time, then id). Each commit becomes a revision whose parent is the
//! revision of its first parent, so merges turn into ordinary commits. A
//! commit without parents becomes the root, or a child of the root when the
//! tree already has one.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::delta::{Delta, FileState, Snapshot};
use crate::error::{Error, Result};
use crate::git::{diff_trees, list_files, CommitRecord, GitRepo, Oid, RepoAccess};
use crate::revision_tree::{self, RevisionId, ROOT};
use crate::snapshot::decode_text;
use crate::store::keys::{META_BRANCH, META_ORIGIN};
use crate::store::{IndexView, Store, StoreBatch};

/// Commits per store batch.
const COMMITS_PER_BATCH: usize = 64;
/// Bytes of decoded blob text kept between commits.
const TEXT_CACHE_BYTES: usize = 64 << 20;

/// Parent a commit is attached to in the revision tree.
pub fn linearize(c: &CommitRecord) -> Option<Oid> {
    c.parents.first().copied()
}

/// Commits reachable from `branch`, parents before children, ties broken by
/// committer time and then object id.
pub fn scan_history(repo: &dyn RepoAccess, branch: &str) -> Result<Vec<CommitRecord>> {
    let head = repo.resolve_branch(branch)?;
    let mut commits: HashMap<Oid, CommitRecord> = HashMap::new();
    let mut stack = vec![head];
    while let Some(oid) = stack.pop() {
        if commits.contains_key(&oid) {
            continue;
        }
        let c = repo.commit(&oid)?;
        stack.extend(c.parents.iter().copied());
        commits.insert(oid, c);
    }

    let mut pending: HashMap<Oid, usize> = HashMap::new();
    let mut children: HashMap<Oid, Vec<Oid>> = HashMap::new();
    for c in commits.values() {
        let distinct: BTreeSet<Oid> = c.parents.iter().copied().collect();
        pending.insert(c.oid, distinct.len());
        for p in distinct {
            children.entry(p).or_default().push(c.oid);
        }
    }
    let mut ready: BTreeSet<(i64, Oid)> = commits
        .values()
        .filter(|c| pending[&c.oid] == 0)
        .map(|c| (c.time, c.oid))
        .collect();
    let mut order = Vec::with_capacity(commits.len());
    while let Some((_, oid)) = ready.pop_first() {
        for child in children.get(&oid).into_iter().flatten() {
            let n = pending.get_mut(child).expect("child is known");
            *n -= 1;
            if *n == 0 {
                ready.insert((commits[child].time, *child));
            }
        }
        order.push(commits.remove(&oid).expect("commit is known"));
    }
    Ok(order)
}

/// Indexable files of a commit, decoded.
pub fn snapshot(repo: &dyn RepoAccess, c: &CommitRecord) -> Result<Snapshot> {
    let mut out = Snapshot::new();
    for (path, blob) in list_files(repo, &c.tree)? {
        if let Some(text) = decode_text(&repo.blob(&blob)?) {
            out.insert(path, text);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub commits_seen: u64,
    pub commits_ingested: u64,
    pub commits_skipped: u64,
    pub revisions: u64,
    pub head_revision: Option<RevisionId>,
    pub posting_changes: u64,
    pub elapsed_ms: u64,
    pub disk_bytes: u64,
}

/// Decoded blob texts, dropped wholesale once they exceed a byte budget.
#[derive(Default)]
struct TextCache {
    map: HashMap<Oid, Option<Arc<str>>>,
    bytes: usize,
}

impl TextCache {
    fn get(&mut self, repo: &dyn RepoAccess, oid: &Oid) -> Result<Option<Arc<str>>> {
        if let Some(t) = self.map.get(oid) {
            return Ok(t.clone());
        }
        let text: Option<Arc<str>> = decode_text(&repo.blob(oid)?).map(Arc::from);
        let size = text.as_ref().map_or(0, |t| t.len());
        if self.bytes + size > TEXT_CACHE_BYTES {
            self.map.clear();
            self.bytes = 0;
        }
        self.bytes += size;
        self.map.insert(*oid, text.clone());
        Ok(text)
    }
}

/// Delta between the trees `base` and `tree`; file ids are registered in
/// `batch`.
fn tree_delta(
    repo: &dyn RepoAccess,
    batch: &mut StoreBatch<'_>,
    cache: &mut TextCache,
    base: Option<&Oid>,
    tree: &Oid,
) -> Result<Delta> {
    let mut delta = Delta::default();
    for change in diff_trees(repo, base, Some(tree))? {
        let old = match &change.old {
            Some(o) => cache.get(repo, o)?,
            None => None,
        };
        let new = match &change.new {
            Some(o) => cache.get(repo, o)?,
            None => None,
        };
        if old == new {
            continue;
        }
        let id = batch.file_id_or_assign(&change.path)?;
        let old = old.map(|t| FileState::from_content(&change.path, id, &t));
        let new = new.map(|t| FileState::from_content(&change.path, id, &t));
        delta.push_file_diff(&change.path, id, old.as_ref(), new.as_ref());
    }
    Ok(delta.finish())
}

fn tree_of_revision(repo: &dyn RepoAccess, view: &impl IndexView, rev: RevisionId) -> Result<Option<Oid>> {
    let node = revision_tree::node(view, rev)?.ok_or(Error::UnknownRevision(rev))?;
    match node.source_commit {
        Some(oid) => Ok(Some(repo.commit(&Oid(oid))?.tree)),
        None => Ok(None),
    }
}

/// Ingests every commit of `branch` not yet in the store, then checks out
/// the branch head. Work is committed in batches, so an interrupted run
/// resumes after the last completed batch.
pub fn build_index(repo: &dyn RepoAccess, branch: &str, store: &Store) -> Result<IngestStats> {
    let started = Instant::now();
    let commits = scan_history(repo, branch)?;
    let mut stats = IngestStats {
        commits_seen: commits.len() as u64,
        ..Default::default()
    };
    let mut cache = TextCache::default();
    let mut batch = store.begin()?;
    let mut in_batch = 0;
    let mut head = None;

    for c in &commits {
        if let Some(rev) = batch.revision_for_commit(&c.oid.0)? {
            stats.commits_skipped += 1;
            head = Some(rev);
            continue;
        }
        let parent = match linearize(c) {
            Some(p) => Some(
                batch
                    .revision_for_commit(&p.0)?
                    .ok_or_else(|| Error::Other(format!("parent {p} of {} not ingested", c.oid)))?,
            ),
            None if revision_tree::revision_count(&batch)? == 0 => None,
            None => Some(ROOT),
        };
        let base_tree = match parent {
            Some(p) => tree_of_revision(repo, &batch, p)?,
            None => None,
        };
        if let Some(p) = parent {
            revision_tree::stage_checkout(&mut batch, p)?;
        }
        let delta = tree_delta(repo, &mut batch, &mut cache, base_tree.as_ref(), &c.tree)?;
        delta.apply(&mut batch)?;
        let rev = match parent {
            Some(p) => revision_tree::add_revision(&mut batch, p, &delta, Some(c.oid.0))?,
            None => revision_tree::add_root(&mut batch, &delta, Some(c.oid.0))?,
        };
        batch.set_active_revision(rev);
        stats.posting_changes += delta.posting_len() as u64;
        stats.commits_ingested += 1;
        head = Some(rev);

        in_batch += 1;
        if in_batch >= COMMITS_PER_BATCH {
            store.commit_batch(batch)?;
            batch = store.begin()?;
            in_batch = 0;
        }
    }
    if let Some(h) = head {
        revision_tree::stage_checkout(&mut batch, h)?;
    }
    store.commit_batch(batch)?;

    let r = store.reader()?;
    stats.revisions = revision_tree::revision_count(&r)?;
    stats.head_revision = head;
    drop(r);
    stats.elapsed_ms = started.elapsed().as_millis() as u64;
    stats.disk_bytes = store.disk_bytes()?;
    Ok(stats)
}

/// Opens the repository at `repo_path`, ingests `branch`, and records the
/// origin so later searches can read file contents back.
pub fn build_index_from_path(repo_path: &Path, branch: &str, store: &Store) -> Result<IngestStats> {
    let repo = GitRepo::open(repo_path)?;
    let stats = build_index(&repo, branch, store)?;
    let origin = repo_path
        .canonicalize()
        .unwrap_or_else(|_| repo_path.to_path_buf());
    let mut batch = store.begin()?;
    batch.put(META_ORIGIN.to_vec(), origin.to_string_lossy().into_owned().into_bytes());
    batch.put(META_BRANCH.to_vec(), branch.as_bytes().to_vec());
    store.commit_batch(batch)?;
    Ok(stats)
}
