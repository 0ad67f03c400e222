//! Global revision tree with delta-replay checkout.
//!
//! Every vertex stores the delta that turns its parent's index into its own.
//! Moving the active revision from `a` to `b` inverts the deltas on the path
//! from `a` up to their lowest common ancestor and then replays the deltas
//! down to `b`, all inside one store batch.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::delta::{compute_delta_against_index, Delta, Snapshot};
use crate::error::{Error, Result};
use crate::store::keys::{
    bytes_key, id_key, revision_key, META_COMMIT_PREFIX, META_NEXT_REVISION, META_WORKTREE_PREFIX,
    NS_REVISIONS,
};
use crate::store::{IndexView, Store, StoreBatch};
use crate::varint::{self, Reader};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct RevisionId(pub u64);

pub const ROOT: RevisionId = RevisionId(0);

impl fmt::Display for RevisionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevisionNode {
    pub id: RevisionId,
    pub parent: Option<RevisionId>,
    pub depth: u64,
    pub source_commit: Option<[u8; 20]>,
}

impl RevisionNode {
    /// `parent (8 BE, u64::MAX for none) ‖ varint depth ‖ flag ‖ [oid 20]`
    fn encode_header(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.parent.map_or(u64::MAX, |p| p.0).to_be_bytes());
        varint::put_u64(out, self.depth);
        match &self.source_commit {
            Some(oid) => {
                out.push(1);
                out.extend_from_slice(oid);
            }
            None => out.push(0),
        }
    }

    fn read_header(id: RevisionId, r: &mut Reader<'_>) -> Option<RevisionNode> {
        let parent = u64::from_be_bytes(r.array::<8>()?);
        let depth = r.u64()?;
        let source_commit = match r.u8()? {
            0 => None,
            1 => Some(r.array::<20>()?),
            _ => return None,
        };
        Some(RevisionNode {
            id,
            parent: (parent != u64::MAX).then_some(RevisionId(parent)),
            depth,
            source_commit,
        })
    }
}

fn corrupt(id: RevisionId) -> Error {
    Error::CorruptStore(format!("bad revision record {id}"))
}

pub fn node(view: &impl IndexView, id: RevisionId) -> Result<Option<RevisionNode>> {
    match view.get(&revision_key(id.0))? {
        None => Ok(None),
        Some(v) => RevisionNode::read_header(id, &mut Reader::new(&v))
            .map(Some)
            .ok_or_else(|| corrupt(id)),
    }
}

pub fn node_with_delta(view: &impl IndexView, id: RevisionId) -> Result<Option<(RevisionNode, Delta)>> {
    let Some(v) = view.get(&revision_key(id.0))? else {
        return Ok(None);
    };
    let mut r = Reader::new(&v);
    let node = RevisionNode::read_header(id, &mut r).ok_or_else(|| corrupt(id))?;
    let delta = Delta::read(&mut r)?;
    if !r.is_empty() {
        return Err(corrupt(id));
    }
    Ok(Some((node, delta)))
}

fn require(view: &impl IndexView, id: RevisionId) -> Result<RevisionNode> {
    node(view, id)?.ok_or(Error::UnknownRevision(id))
}

/// Number of revisions, i.e. the next id to be assigned.
pub fn revision_count(view: &impl IndexView) -> Result<u64> {
    view.meta_counter(META_NEXT_REVISION)
}

/// Every node in id order.
pub fn all_nodes(view: &impl IndexView) -> Result<Vec<RevisionNode>> {
    let mut out = Vec::new();
    let mut bad = None;
    view.scan_prefix(&[NS_REVISIONS], &mut |k, v| {
        let id = RevisionId(u64::from_be_bytes(k[1..].try_into().unwrap_or_default()));
        match RevisionNode::read_header(id, &mut Reader::new(v)) {
            Some(n) => out.push(n),
            None => bad = Some(id),
        }
        bad.is_none()
    })?;
    bad.map_or(Ok(out), |id| Err(corrupt(id)))
}

/// Persists the root revision. Its delta is taken against the empty index.
pub fn add_root(
    batch: &mut StoreBatch<'_>,
    delta: &Delta,
    source_commit: Option<[u8; 20]>,
) -> Result<RevisionId> {
    if revision_count(batch)? != 0 {
        return Err(Error::Other("revision tree already has a root".into()));
    }
    let id = RevisionId(batch.take_counter(META_NEXT_REVISION)?);
    let node = RevisionNode {
        id,
        parent: None,
        depth: 0,
        source_commit,
    };
    write_node(batch, &node, delta);
    Ok(id)
}

/// Makes sure some revision is active, creating an empty root in an empty
/// tree and checking out the root of a tree nothing was checked out from.
pub fn ensure_active(batch: &mut StoreBatch<'_>) -> Result<RevisionId> {
    if let Some(active) = batch.active_revision()? {
        return Ok(active);
    }
    if node(batch, ROOT)?.is_none() {
        add_root(batch, &Delta::default(), None)?;
    }
    stage_checkout(batch, ROOT)?;
    Ok(ROOT)
}

fn write_node(batch: &mut StoreBatch<'_>, node: &RevisionNode, delta: &Delta) {
    let mut value = Vec::new();
    node.encode_header(&mut value);
    value.extend_from_slice(&delta.serialize());
    batch.put(revision_key(node.id.0), value);
    if let Some(oid) = node.source_commit {
        batch.put(bytes_key(META_COMMIT_PREFIX, &oid), node.id.0.to_be_bytes().to_vec());
    }
}

/// Persists a new child of `parent` holding `delta`. The active revision is
/// left alone.
pub fn add_revision(
    batch: &mut StoreBatch<'_>,
    parent: RevisionId,
    delta: &Delta,
    source_commit: Option<[u8; 20]>,
) -> Result<RevisionId> {
    let p = require(batch, parent)?;
    let id = RevisionId(batch.take_counter(META_NEXT_REVISION)?);
    let node = RevisionNode {
        id,
        parent: Some(parent),
        depth: p.depth + 1,
        source_commit,
    };
    write_node(batch, &node, delta);
    Ok(id)
}

/// Deepest common ancestor, found by lifting the deeper node and then
/// walking both up in lockstep.
pub fn lca(view: &impl IndexView, a: RevisionId, b: RevisionId) -> Result<RevisionId> {
    let mut x = require(view, a)?;
    let mut y = require(view, b)?;
    let up = |n: &RevisionNode| -> Result<RevisionNode> {
        let p = n.parent.ok_or_else(|| corrupt(n.id))?;
        require(view, p)
    };
    while x.depth > y.depth {
        x = up(&x)?;
    }
    while y.depth > x.depth {
        y = up(&y)?;
    }
    while x.id != y.id {
        x = up(&x)?;
        y = up(&y)?;
    }
    Ok(x.id)
}

/// Vertices strictly below `ancestor` on the way up from `from`, nearest
/// first. With no ancestor the walk includes the root.
fn path_up(
    view: &impl IndexView,
    from: RevisionId,
    ancestor: Option<RevisionId>,
) -> Result<Vec<RevisionId>> {
    let mut out = Vec::new();
    let mut cur = Some(from);
    while let Some(id) = cur {
        if Some(id) == ancestor {
            break;
        }
        out.push(id);
        cur = require(view, id)?.parent;
    }
    if ancestor.is_some() && cur.is_none() {
        return Err(corrupt(from));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CheckoutStats {
    pub from: Option<RevisionId>,
    pub to: Option<RevisionId>,
    pub lca: Option<RevisionId>,
    pub deltas_replayed: u64,
    /// Sum of posting-change counts over the replayed deltas.
    pub path_posting_changes: u64,
    /// Posting adjustments actually staged.
    pub posting_mutations: u64,
}

/// Stages the move of the active revision to `target` into `batch`. With no
/// active revision the index is empty and every delta from the root down is
/// replayed.
pub fn stage_checkout(batch: &mut StoreBatch<'_>, target: RevisionId) -> Result<CheckoutStats> {
    require(batch, target)?;
    let from = batch.active_revision()?;
    let mut stats = CheckoutStats {
        from,
        to: Some(target),
        ..Default::default()
    };
    if from == Some(target) {
        stats.lca = Some(target);
        return Ok(stats);
    }
    let base = batch.posting_mutations();
    let meet = match from {
        Some(from) => Some(lca(batch, from, target)?),
        None => None,
    };
    stats.lca = meet;

    let ups = match from {
        Some(from) => path_up(batch, from, meet)?,
        None => Vec::new(),
    };
    for id in ups {
        let (_, d) = node_with_delta(batch, id)?.ok_or(Error::UnknownRevision(id))?;
        d.invert().apply(batch)?;
        stats.deltas_replayed += 1;
        stats.path_posting_changes += d.posting_len() as u64;
    }
    let mut down = path_up(batch, target, meet)?;
    down.reverse();
    for id in down {
        let (_, d) = node_with_delta(batch, id)?.ok_or(Error::UnknownRevision(id))?;
        d.apply(batch)?;
        stats.deltas_replayed += 1;
        stats.path_posting_changes += d.posting_len() as u64;
    }
    batch.set_active_revision(target);
    stats.posting_mutations = batch.posting_mutations() - base;
    Ok(stats)
}

/// Makes `target` the active revision in one atomic batch. On error
/// nothing is written.
pub fn checkout(store: &Store, target: RevisionId) -> Result<CheckoutStats> {
    let mut batch = store.begin()?;
    let stats = stage_checkout(&mut batch, target)?;
    store.commit_batch(batch)?;
    Ok(stats)
}

/// Outcome of recording a working snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CommitOutcome {
    pub revision: RevisionId,
    pub parent: RevisionId,
    pub file_ops: usize,
    pub posting_changes: usize,
    pub symbol_ops: usize,
}

/// Records `snapshot` as a new child of the active revision and makes it
/// active. `worktree` is remembered so search can read the contents back.
pub fn commit_working(store: &Store, snapshot: &Snapshot, worktree: Option<&Path>) -> Result<RevisionId> {
    commit_snapshot(store, snapshot, worktree).map(|o| o.revision)
}

/// [`commit_working`] with the size of the recorded delta.
pub fn commit_snapshot(store: &Store, snapshot: &Snapshot, worktree: Option<&Path>) -> Result<CommitOutcome> {
    let mut batch = store.begin()?;
    let parent = ensure_active(&mut batch)?;
    let delta = compute_delta_against_index(&mut batch, snapshot)?;
    delta.apply(&mut batch)?;
    let id = add_revision(&mut batch, parent, &delta, None)?;
    if let Some(dir) = worktree {
        let dir = dir.canonicalize().unwrap_or_else(|_| dir.to_path_buf());
        batch.put(
            id_key(META_WORKTREE_PREFIX, id.0),
            dir.to_string_lossy().into_owned().into_bytes(),
        );
    }
    batch.set_active_revision(id);
    store.commit_batch(batch)?;
    Ok(CommitOutcome {
        revision: id,
        parent,
        file_ops: delta.file_ops.len(),
        posting_changes: delta.posting_changes.len(),
        symbol_ops: delta.symbol_ops.len(),
    })
}
