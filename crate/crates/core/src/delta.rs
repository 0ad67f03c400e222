//! Reversible edit script stored at each revision-tree vertex.
//!
//! A [`Delta`] turns the indexed state of a parent revision into the state of
//! its child: files appear or disappear, posting counts move, symbols come
//! and go. [`Delta::invert`] produces the script for the opposite direction.
//!
//! Binary layout (`TGD1`), all varints LEB128:
//!
//! ```text
//! "TGD1" ‖ u32 LE version
//! varint n ‖ n × (op u8 [0 add, 1 remove] ‖ varint file id ‖ varint len ‖ UTF-8 path)
//! varint n ‖ n × (trigram 12 bytes ‖ varint file id ‖ zigzag varint change)
//! varint n ‖ n × (op u8 ‖ symbol record)
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::camelhump::{extract_symbols, SymbolRecord};
use crate::error::{Error, Result};
use crate::store::{FileId, IndexView, StoreBatch};
use crate::text_model::{bag_diff, extract_trigrams, Trigram, TrigramBag, TRIGRAM_BYTES};
use crate::varint::{self, Reader};

pub const DELTA_MAGIC: &[u8; 4] = b"TGD1";
pub const DELTA_VERSION: u32 = 1;

/// Path → decoded text content.
pub type Snapshot = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FileOp {
    Add { path: String, id: FileId },
    Remove { path: String, id: FileId },
}

impl FileOp {
    fn inverted(&self) -> FileOp {
        match self {
            FileOp::Add { path, id } => FileOp::Remove {
                path: path.clone(),
                id: *id,
            },
            FileOp::Remove { path, id } => FileOp::Add {
                path: path.clone(),
                id: *id,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PostingChange {
    pub trigram: Trigram,
    pub file: FileId,
    pub change: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolOp {
    Add(SymbolRecord),
    Remove(SymbolRecord),
}

impl SymbolOp {
    fn inverted(&self) -> SymbolOp {
        match self {
            SymbolOp::Add(r) => SymbolOp::Remove(r.clone()),
            SymbolOp::Remove(r) => SymbolOp::Add(r.clone()),
        }
    }
}

/// Posting changes are kept sorted by (trigram, file) with no duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Delta {
    pub file_ops: Vec<FileOp>,
    pub posting_changes: Vec<PostingChange>,
    pub symbol_ops: Vec<SymbolOp>,
}

/// Assigns stable file ids while deltas are computed.
pub trait FileIdAllocator {
    fn file_id_for(&mut self, path: &str) -> Result<FileId>;
}

impl FileIdAllocator for StoreBatch<'_> {
    fn file_id_for(&mut self, path: &str) -> Result<FileId> {
        self.file_id_or_assign(path)
    }
}

/// Standalone allocator for computing deltas outside a store.
#[derive(Debug, Default)]
pub struct MemoryIds {
    ids: HashMap<String, FileId>,
    next: u64,
}

impl FileIdAllocator for MemoryIds {
    fn file_id_for(&mut self, path: &str) -> Result<FileId> {
        let next = &mut self.next;
        Ok(*self.ids.entry(path.to_string()).or_insert_with(|| {
            let id = FileId(*next);
            *next += 1;
            id
        }))
    }
}

/// What the index knows about one file: its trigram bag and its symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FileState {
    pub bag: TrigramBag,
    pub symbols: BTreeSet<SymbolRecord>,
}

impl FileState {
    pub fn from_content(path: &str, id: FileId, content: &str) -> Self {
        FileState {
            bag: extract_trigrams(content),
            symbols: extract_symbols(content, path, id).into_iter().collect(),
        }
    }
}

impl Delta {
    pub fn is_empty(&self) -> bool {
        self.file_ops.is_empty() && self.posting_changes.is_empty() && self.symbol_ops.is_empty()
    }

    /// Number of posting changes; the unit of checkout cost.
    pub fn posting_len(&self) -> usize {
        self.posting_changes.len()
    }

    /// Add and Remove swap, counts negate, op order reverses. Posting changes
    /// commute and keep their sorted order.
    pub fn invert(&self) -> Delta {
        Delta {
            file_ops: self.file_ops.iter().rev().map(FileOp::inverted).collect(),
            posting_changes: self
                .posting_changes
                .iter()
                .map(|p| PostingChange {
                    change: -p.change,
                    ..*p
                })
                .collect(),
            symbol_ops: self.symbol_ops.iter().rev().map(SymbolOp::inverted).collect(),
        }
    }

    /// Appends the difference between two states of one file.
    pub fn push_file_diff(
        &mut self,
        path: &str,
        id: FileId,
        old: Option<&FileState>,
        new: Option<&FileState>,
    ) {
        match (old, new) {
            (None, Some(_)) => self.file_ops.push(FileOp::Add {
                path: path.to_string(),
                id,
            }),
            (Some(_), None) => self.file_ops.push(FileOp::Remove {
                path: path.to_string(),
                id,
            }),
            _ => {}
        }
        let empty = FileState::default();
        let old = old.unwrap_or(&empty);
        let new = new.unwrap_or(&empty);
        self.posting_changes.extend(
            bag_diff(&old.bag, &new.bag)
                .into_iter()
                .map(|(trigram, change)| PostingChange {
                    trigram,
                    file: id,
                    change,
                }),
        );
        self.symbol_ops.extend(
            old.symbols
                .difference(&new.symbols)
                .cloned()
                .map(SymbolOp::Remove),
        );
        self.symbol_ops
            .extend(new.symbols.difference(&old.symbols).cloned().map(SymbolOp::Add));
    }

    /// Restores the (trigram, file) order after pushes.
    pub fn finish(mut self) -> Delta {
        self.posting_changes
            .sort_unstable_by_key(|p| (p.trigram, p.file));
        self
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.posting_changes.len() * 16);
        out.extend_from_slice(DELTA_MAGIC);
        out.extend_from_slice(&DELTA_VERSION.to_le_bytes());
        varint::put_u64(&mut out, self.file_ops.len() as u64);
        for op in &self.file_ops {
            let (tag, path, id) = match op {
                FileOp::Add { path, id } => (0u8, path, id),
                FileOp::Remove { path, id } => (1u8, path, id),
            };
            out.push(tag);
            varint::put_u64(&mut out, id.0);
            varint::put_u64(&mut out, path.len() as u64);
            out.extend_from_slice(path.as_bytes());
        }
        varint::put_u64(&mut out, self.posting_changes.len() as u64);
        for p in &self.posting_changes {
            out.extend_from_slice(&p.trigram.to_bytes());
            varint::put_u64(&mut out, p.file.0);
            varint::put_i64(&mut out, p.change);
        }
        varint::put_u64(&mut out, self.symbol_ops.len() as u64);
        for op in &self.symbol_ops {
            let (tag, rec) = match op {
                SymbolOp::Add(r) => (0u8, r),
                SymbolOp::Remove(r) => (1u8, r),
            };
            out.push(tag);
            rec.encode_into(&mut out);
        }
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Delta> {
        let mut r = Reader::new(bytes);
        let delta = Self::read(&mut r)?;
        if !r.is_empty() {
            return Err(Error::DeltaFormat("trailing bytes"));
        }
        Ok(delta)
    }

    /// Reads one delta from the cursor, leaving anything after it unread.
    pub fn read(r: &mut Reader<'_>) -> Result<Delta> {
        const TRUNC: Error = Error::DeltaFormat("truncated");
        if r.bytes(4).ok_or(TRUNC)? != DELTA_MAGIC {
            return Err(Error::DeltaFormat("bad magic"));
        }
        let version = u32::from_le_bytes(r.array::<4>().ok_or(TRUNC)?);
        if version != DELTA_VERSION {
            return Err(Error::DeltaFormat("unsupported version"));
        }

        // every element takes at least one byte, so counts are bounded by the input
        let count = |r: &mut Reader<'_>| -> Result<usize> {
            let n = r.u64().ok_or(TRUNC)?;
            usize::try_from(n)
                .ok()
                .filter(|&n| n <= r.remaining())
                .ok_or(TRUNC)
        };

        let n = count(r)?;
        let mut file_ops = Vec::with_capacity(n);
        for _ in 0..n {
            let tag = r.u8().ok_or(TRUNC)?;
            let id = FileId(r.u64().ok_or(TRUNC)?);
            let len = usize::try_from(r.u64().ok_or(TRUNC)?).map_err(|_| TRUNC)?;
            let path = std::str::from_utf8(r.bytes(len).ok_or(TRUNC)?)
                .map_err(|_| Error::DeltaFormat("path is not UTF-8"))?
                .to_string();
            file_ops.push(match tag {
                0 => FileOp::Add { path, id },
                1 => FileOp::Remove { path, id },
                _ => return Err(Error::DeltaFormat("bad file op tag")),
            });
        }

        let n = count(r)?;
        let mut posting_changes: Vec<PostingChange> = Vec::with_capacity(n);
        for _ in 0..n {
            let trigram = Trigram::from_bytes(r.bytes(TRIGRAM_BYTES).ok_or(TRUNC)?)
                .ok_or(Error::DeltaFormat("bad trigram"))?;
            let file = FileId(r.u64().ok_or(TRUNC)?);
            let change = r.i64().ok_or(TRUNC)?;
            if change == 0 {
                return Err(Error::DeltaFormat("zero posting change"));
            }
            if let Some(prev) = posting_changes.last() {
                if (prev.trigram, prev.file) >= (trigram, file) {
                    return Err(Error::DeltaFormat("posting changes unsorted or duplicated"));
                }
            }
            posting_changes.push(PostingChange {
                trigram,
                file,
                change,
            });
        }

        let n = count(r)?;
        let mut symbol_ops = Vec::with_capacity(n);
        for _ in 0..n {
            let tag = r.u8().ok_or(TRUNC)?;
            let rec = SymbolRecord::read_from(r).ok_or(Error::DeltaFormat("bad symbol record"))?;
            symbol_ops.push(match tag {
                0 => SymbolOp::Add(rec),
                1 => SymbolOp::Remove(rec),
                _ => return Err(Error::DeltaFormat("bad symbol op tag")),
            });
        }

        Ok(Delta {
            file_ops,
            posting_changes,
            symbol_ops,
        })
    }

    /// Stages every change into `batch`. The batch must hold this delta's
    /// source state; any inconsistency is reported as [`Error::CorruptDelta`]
    /// and the batch should be dropped.
    pub fn apply(&self, batch: &mut StoreBatch<'_>) -> Result<()> {
        for op in &self.file_ops {
            match op {
                FileOp::Add { path, id } => {
                    batch.bind_file_id(path, *id)?;
                    if batch.is_file_live(*id)? {
                        return Err(Error::CorruptDelta(format!("`{path}` is already present")));
                    }
                    batch.set_file_live(*id, true);
                }
                FileOp::Remove { path, id } => {
                    if batch.file_id(path)? != Some(*id) || !batch.is_file_live(*id)? {
                        return Err(Error::CorruptDelta(format!("`{path}` is not present")));
                    }
                    batch.set_file_live(*id, false);
                }
            }
        }
        for p in &self.posting_changes {
            batch.adjust_posting(&p.trigram, p.file, p.change)?;
        }
        for op in &self.symbol_ops {
            match op {
                SymbolOp::Add(rec) => {
                    let id = batch.symbol_id_or_assign(rec)?;
                    if batch.is_symbol_live(id)? {
                        return Err(Error::CorruptDelta(format!("symbol `{}` already live", rec.name)));
                    }
                    batch.set_symbol_live(id, rec.file, true);
                    for t in rec.hump_trigrams() {
                        batch.adjust_symbol_posting(&t, id, 1)?;
                    }
                }
                SymbolOp::Remove(rec) => {
                    let id = batch
                        .symbol_id(rec)?
                        .filter(|&id| batch.is_symbol_live(id).unwrap_or(false))
                        .ok_or_else(|| {
                            Error::CorruptDelta(format!("symbol `{}` is not live", rec.name))
                        })?;
                    batch.set_symbol_live(id, rec.file, false);
                    for t in rec.hump_trigrams() {
                        batch.adjust_symbol_posting(&t, id, -1)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Delta between two full snapshots. Unchanged files contribute nothing;
/// ids come from `ids`, so new paths get registered there.
pub fn compute_delta(
    old: &Snapshot,
    new: &Snapshot,
    ids: &mut dyn FileIdAllocator,
) -> Result<Delta> {
    let paths: BTreeSet<&String> = old.keys().chain(new.keys()).collect();
    let mut delta = Delta::default();
    for path in paths {
        let (o, n) = (old.get(path), new.get(path));
        if o == n {
            continue;
        }
        let id = ids.file_id_for(path)?;
        let o = o.map(|c| FileState::from_content(path, id, c));
        let n = n.map(|c| FileState::from_content(path, id, c));
        delta.push_file_diff(path, id, o.as_ref(), n.as_ref());
    }
    Ok(delta.finish())
}

/// Delta from the indexed active state (read through `view`) to `new`.
/// Needs no file contents for the old side: bags and symbol sets come from
/// the store.
pub fn compute_delta_against_index(
    batch: &mut StoreBatch<'_>,
    new: &Snapshot,
) -> Result<Delta> {
    let mut delta = Delta::default();
    let live: BTreeMap<String, FileId> = batch
        .live_files()?
        .into_iter()
        .map(|(id, p)| (p, id))
        .collect();

    let paths: BTreeSet<&String> = live.keys().chain(new.keys()).collect();
    for path in paths {
        let id = match live.get(path) {
            Some(&id) => id,
            None => batch.file_id_or_assign(path)?,
        };
        let old_state = if live.contains_key(path) {
            let mut symbols = BTreeSet::new();
            for sid in batch.file_symbols(id)? {
                let rec = batch
                    .symbol_record(sid)?
                    .ok_or_else(|| Error::CorruptStore(format!("symbol {} unregistered", sid.0)))?;
                symbols.insert(rec);
            }
            Some(FileState {
                bag: batch.file_bag(id)?,
                symbols,
            })
        } else {
            None
        };
        let new_state = new.get(path).map(|c| FileState::from_content(path, id, c));
        if old_state == new_state {
            continue;
        }
        delta.push_file_diff(path, id, old_state.as_ref(), new_state.as_ref());
    }
    Ok(delta.finish())
}
