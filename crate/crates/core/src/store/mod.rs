//! Persistent posting storage for the active revision.
//!
//! The index lives in an ordered key-value backend split into five
//! namespaces (postings, symbol postings, files, revisions, meta; see
//! [`keys`]). Reads go through a [`StoreReader`] snapshot. Writes are staged
//! in a [`StoreBatch`] and become visible all at once in
//! [`Store::commit_batch`]; only one batch may be open at a time.

mod backend;
pub mod keys;
mod redb_backend;

use std::path::{Path, PathBuf};
use std::sync::{Mutex, MutexGuard};

use serde::Serialize;

pub use backend::{KvBackend, KvRead, MemoryBackend, Mutations};
pub use redb_backend::{RedbBackend, DB_FILE};

use crate::camelhump::SymbolRecord;
use crate::error::{Error, Result};
use crate::revision_tree::RevisionId;
use crate::text_model::{Trigram, TrigramBag};
use crate::varint;
use keys::*;

pub const MAGIC: &[u8; 4] = b"TGIX";
pub const FORMAT_VERSION: u32 = 1;

/// Stable id of a repository path. Never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FileId(pub u64);

/// Stable id of a symbol record. Never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SymbolId(pub u64);

/// Raw key-value access shared by readers and batches.
pub trait KvView {
    fn get(&self, key: &[u8]) -> Result<Option<Vec<u8>>>;
    fn scan_prefix(
        &self,
        prefix: &[u8],
        visit: &mut dyn FnMut(&[u8], &[u8]) -> bool,
    ) -> Result<()>;
}

fn decode_count(key: &[u8], value: &[u8]) -> Result<u32> {
    varint::decode_exact_u64(value)
        .and_then(|v| u32::try_from(v).ok())
        .filter(|&v| v > 0)
        .ok_or_else(|| Error::CorruptStore(format!("bad posting count under key {key:?}")))
}

fn decode_be_u64(value: &[u8]) -> Result<u64> {
    value
        .try_into()
        .map(u64::from_be_bytes)
        .map_err(|_| Error::CorruptStore("expected 8-byte id".into()))
}

fn decode_string(value: Vec<u8>) -> Result<String> {
    String::from_utf8(value).map_err(|_| Error::CorruptStore("non UTF-8 path".into()))
}

/// Typed queries over any [`KvView`].
pub trait IndexView: KvView {
    /// Every posting under `t`, materialized, in `FileId` order.
    fn files_for_trigram(&self, t: &Trigram) -> Result<Vec<(FileId, u32)>> {
        self.postings_for(NS_POSTINGS, t)
            .map(|v| v.into_iter().map(|(id, c)| (FileId(id), c)).collect())
    }

    fn symbols_for_trigram(&self, t: &Trigram) -> Result<Vec<(SymbolId, u32)>> {
        self.postings_for(NS_SYMBOL_POSTINGS, t)
            .map(|v| v.into_iter().map(|(id, c)| (SymbolId(id), c)).collect())
    }

    fn postings_for(&self, ns: u8, t: &Trigram) -> Result<Vec<(u64, u32)>> {
        let mut out = Vec::new();
        let mut err = None;
        self.scan_prefix(&posting_prefix(ns, t), &mut |k, v| {
            match (trailing_u64(k), decode_count(k, v)) {
                (Some(id), Ok(c)) => out.push((id, c)),
                (_, Err(e)) => {
                    err = Some(e);
                    return false;
                }
                (None, _) => {
                    err = Some(Error::CorruptStore("short posting key".into()));
                    return false;
                }
            }
            true
        })?;
        err.map_or(Ok(out), Err)
    }

    /// Number of postings under `t` without materializing them.
    fn posting_list_len(&self, ns: u8, t: &Trigram) -> Result<usize> {
        let mut n = 0;
        self.scan_prefix(&posting_prefix(ns, t), &mut |_, _| {
            n += 1;
            true
        })?;
        Ok(n)
    }

    /// Full dump of a posting namespace, in key order.
    fn posting_dump(&self, ns: u8) -> Result<Vec<(Trigram, u64, u32)>> {
        let mut out = Vec::new();
        let mut err = None;
        self.scan_prefix(&[ns], &mut |k, v| {
            match (parse_posting_key(k), decode_count(k, v)) {
                (Some((t, id)), Ok(c)) => {
                    out.push((t, id, c));
                    true
                }
                _ => {
                    err = Some(Error::CorruptStore(format!("bad posting entry {k:?}")));
                    false
                }
            }
        })?;
        err.map_or(Ok(out), Err)
    }

    fn active_revision(&self) -> Result<Option<RevisionId>> {
        self.get(META_ACTIVE)?
            .map(|v| decode_be_u64(&v).map(RevisionId))
            .transpose()
    }

    fn meta_counter(&self, key: &[u8]) -> Result<u64> {
        self.get(key)?.map_or(Ok(0), |v| decode_be_u64(&v))
    }

    fn file_id(&self, path: &str) -> Result<Option<FileId>> {
        self.get(&bytes_key(FILE_PATH_PREFIX, path.as_bytes()))?
            .map(|v| decode_be_u64(&v).map(FileId))
            .transpose()
    }

    fn file_path(&self, id: FileId) -> Result<Option<String>> {
        self.get(&id_key(FILE_ID_PREFIX, id.0))?
            .map(decode_string)
            .transpose()
    }

    fn is_file_live(&self, id: FileId) -> Result<bool> {
        Ok(self.get(&id_key(FILE_LIVE_PREFIX, id.0))?.is_some())
    }

    /// Files present in the active revision with their paths, by id.
    fn live_files(&self) -> Result<Vec<(FileId, String)>> {
        let mut ids = Vec::new();
        self.scan_prefix(FILE_LIVE_PREFIX, &mut |k, _| {
            if let Some(id) = trailing_u64(k) {
                ids.push(FileId(id));
            }
            true
        })?;
        ids.into_iter()
            .map(|id| {
                let path = self
                    .file_path(id)?
                    .ok_or_else(|| Error::CorruptStore(format!("live file {} unregistered", id.0)))?;
                Ok((id, path))
            })
            .collect()
    }

    /// Trigram bag of a file as currently indexed.
    fn file_bag(&self, id: FileId) -> Result<TrigramBag> {
        let prefix = id_key(FILE_BAG_PREFIX, id.0);
        let mut entries = Vec::new();
        let mut err = None;
        self.scan_prefix(&prefix, &mut |k, v| {
            let t = Trigram::from_bytes(&k[prefix.len()..]);
            match (t, decode_count(k, v)) {
                (Some(t), Ok(c)) => {
                    entries.push((t, c));
                    true
                }
                _ => {
                    err = Some(Error::CorruptStore("bad per-file bag entry".into()));
                    false
                }
            }
        })?;
        err.map_or(Ok(entries.into_iter().collect()), Err)
    }

    fn file_symbols(&self, id: FileId) -> Result<Vec<SymbolId>> {
        let mut out = Vec::new();
        self.scan_prefix(&id_key(FILE_SYMBOLS_PREFIX, id.0), &mut |k, _| {
            if let Some(s) = trailing_u64(k) {
                out.push(SymbolId(s));
            }
            true
        })?;
        Ok(out)
    }

    fn symbol_id(&self, record: &SymbolRecord) -> Result<Option<SymbolId>> {
        self.get(&bytes_key(SYMBOL_KEY_PREFIX, &record.encode()))?
            .map(|v| decode_be_u64(&v).map(SymbolId))
            .transpose()
    }

    fn symbol_record(&self, id: SymbolId) -> Result<Option<SymbolRecord>> {
        match self.get(&id_key(SYMBOL_RECORD_PREFIX, id.0))? {
            None => Ok(None),
            Some(bytes) => SymbolRecord::decode(&bytes)
                .map(Some)
                .ok_or_else(|| Error::CorruptStore(format!("bad symbol record {}", id.0))),
        }
    }

    fn is_symbol_live(&self, id: SymbolId) -> Result<bool> {
        Ok(self.get(&id_key(SYMBOL_LIVE_PREFIX, id.0))?.is_some())
    }

    fn live_symbols(&self) -> Result<Vec<(SymbolId, SymbolRecord)>> {
        let mut ids = Vec::new();
        self.scan_prefix(SYMBOL_LIVE_PREFIX, &mut |k, _| {
            if let Some(id) = trailing_u64(k) {
                ids.push(SymbolId(id));
            }
            true
        })?;
        ids.into_iter()
            .map(|id| {
                let rec = self
                    .symbol_record(id)?
                    .ok_or_else(|| Error::CorruptStore(format!("live symbol {} unregistered", id.0)))?;
                Ok((id, rec))
            })
            .collect()
    }

    fn revision_for_commit(&self, oid: &[u8; 20]) -> Result<Option<RevisionId>> {
        self.get(&bytes_key(META_COMMIT_PREFIX, oid))?
            .map(|v| decode_be_u64(&v).map(RevisionId))
            .transpose()
    }

    /// All (source commit, revision) pairs in commit-id order.
    fn commit_index(&self) -> Result<Vec<([u8; 20], RevisionId)>> {
        let mut out = Vec::new();
        let mut bad = false;
        self.scan_prefix(META_COMMIT_PREFIX, &mut |k, v| {
            match (k[META_COMMIT_PREFIX.len()..].try_into(), decode_be_u64(v)) {
                (Ok(oid), Ok(rev)) => out.push((oid, RevisionId(rev))),
                _ => bad = true,
            }
            !bad
        })?;
        if bad {
            return Err(Error::CorruptStore("bad commit index entry".into()));
        }
        Ok(out)
    }

    fn worktree_of(&self, rev: RevisionId) -> Result<Option<PathBuf>> {
        self.get(&id_key(META_WORKTREE_PREFIX, rev.0))?
            .map(|v| decode_string(v).map(PathBuf::from))
            .transpose()
    }

    fn meta_string(&self, key: &[u8]) -> Result<Option<String>> {
        self.get(key)?.map(decode_string).transpose()
    }
}

impl<T: KvView + ?Sized> IndexView for T {}

/// Consistent read snapshot.
pub struct StoreReader<'s> {
    inner: Box<dyn KvRead + 's>,
}

impl KvView for StoreReader<'_> {
    fn get(&self, key: &[u8]) -> Result<Option<Vec<u8>>> {
        self.inner.get(key)
    }

    fn scan_prefix(
        &self,
        prefix: &[u8],
        visit: &mut dyn FnMut(&[u8], &[u8]) -> bool,
    ) -> Result<()> {
        self.inner.scan_prefix(prefix, visit)
    }
}

/// Staged mutations over a read snapshot. Reads see staged writes.
/// Dropping a batch without committing discards it.
pub struct StoreBatch<'s> {
    base: StoreReader<'s>,
    staged: Mutations,
    posting_mutations: u64,
    symbol_posting_mutations: u64,
    _writer: MutexGuard<'s, ()>,
}

impl KvView for StoreBatch<'_> {
    fn get(&self, key: &[u8]) -> Result<Option<Vec<u8>>> {
        match self.staged.get(key) {
            Some(v) => Ok(v.clone()),
            None => self.base.get(key),
        }
    }

    fn scan_prefix(
        &self,
        prefix: &[u8],
        visit: &mut dyn FnMut(&[u8], &[u8]) -> bool,
    ) -> Result<()> {
        let overlay: Vec<(&Vec<u8>, &Option<Vec<u8>>)> =
            self.staged.range(backend::prefix_range(prefix)).collect();
        if overlay.is_empty() {
            return self.base.scan_prefix(prefix, visit);
        }
        let mut merged: std::collections::BTreeMap<Vec<u8>, Vec<u8>> = Default::default();
        self.base.scan_prefix(prefix, &mut |k, v| {
            merged.insert(k.to_vec(), v.to_vec());
            true
        })?;
        for (k, v) in overlay {
            match v {
                Some(v) => merged.insert(k.clone(), v.clone()),
                None => merged.remove(k),
            };
        }
        for (k, v) in &merged {
            if !visit(k, v) {
                break;
            }
        }
        Ok(())
    }
}

impl StoreBatch<'_> {
    pub fn put(&mut self, key: Vec<u8>, value: Vec<u8>) {
        self.staged.insert(key, Some(value));
    }

    pub fn delete(&mut self, key: Vec<u8>) {
        self.staged.insert(key, None);
    }

    pub fn is_empty(&self) -> bool {
        self.staged.is_empty()
    }

    pub fn staged_len(&self) -> usize {
        self.staged.len()
    }

    /// Full-text posting changes staged so far.
    pub fn posting_mutations(&self) -> u64 {
        self.posting_mutations
    }

    pub fn symbol_posting_mutations(&self) -> u64 {
        self.symbol_posting_mutations
    }

    fn adjust_count(&mut self, key: Vec<u8>, delta: i64) -> Result<()> {
        let current = match self.get(&key)? {
            Some(v) => i64::from(decode_count(&key, &v)?),
            None => 0,
        };
        let next = current + delta;
        if next < 0 || next > i64::from(u32::MAX) {
            return Err(Error::CorruptDelta(format!(
                "count {current} {delta:+} out of range under key {key:?}"
            )));
        }
        if next == 0 {
            self.delete(key);
        } else {
            self.put(key, varint::encode_u64(next as u64));
        }
        Ok(())
    }

    /// Adds `delta` to the occurrence count of `t` in file `f`. A result of
    /// zero removes the posting; a negative result is a hard error.
    pub fn adjust_posting(&mut self, t: &Trigram, f: FileId, delta: i64) -> Result<()> {
        if delta == 0 {
            return Ok(());
        }
        self.adjust_count(posting_key(NS_POSTINGS, t, f.0), delta)?;
        self.adjust_count(file_bag_key(f.0, t), delta)?;
        self.posting_mutations += 1;
        Ok(())
    }

    pub fn adjust_symbol_posting(&mut self, t: &Trigram, s: SymbolId, delta: i64) -> Result<()> {
        if delta == 0 {
            return Ok(());
        }
        self.adjust_count(posting_key(NS_SYMBOL_POSTINGS, t, s.0), delta)?;
        self.symbol_posting_mutations += 1;
        Ok(())
    }

    pub fn set_active_revision(&mut self, rev: RevisionId) {
        self.put(META_ACTIVE.to_vec(), rev.0.to_be_bytes().to_vec());
    }

    /// Returns the current value of a counter and stages its increment.
    pub fn take_counter(&mut self, key: &[u8]) -> Result<u64> {
        let v = self.meta_counter(key)?;
        self.put(key.to_vec(), (v + 1).to_be_bytes().to_vec());
        Ok(v)
    }

    /// Id of `path`, registering a fresh one on first sight.
    pub fn file_id_or_assign(&mut self, path: &str) -> Result<FileId> {
        if let Some(id) = self.file_id(path)? {
            return Ok(id);
        }
        let id = FileId(self.take_counter(META_NEXT_FILE)?);
        self.put(
            bytes_key(FILE_PATH_PREFIX, path.as_bytes()),
            id.0.to_be_bytes().to_vec(),
        );
        self.put(id_key(FILE_ID_PREFIX, id.0), path.as_bytes().to_vec());
        Ok(id)
    }

    /// Registers `path` under an id chosen elsewhere. Fails if either side
    /// is already bound to something else.
    pub fn bind_file_id(&mut self, path: &str, id: FileId) -> Result<()> {
        match (self.file_id(path)?, self.file_path(id)?) {
            (Some(existing), _) if existing == id => Ok(()),
            (None, None) => {
                self.put(
                    bytes_key(FILE_PATH_PREFIX, path.as_bytes()),
                    id.0.to_be_bytes().to_vec(),
                );
                self.put(id_key(FILE_ID_PREFIX, id.0), path.as_bytes().to_vec());
                let next = self.meta_counter(META_NEXT_FILE)?;
                if id.0 >= next {
                    self.put(META_NEXT_FILE.to_vec(), (id.0 + 1).to_be_bytes().to_vec());
                }
                Ok(())
            }
            _ => Err(Error::CorruptDelta(format!(
                "file id {} conflicts with registry for `{path}`",
                id.0
            ))),
        }
    }

    pub fn set_file_live(&mut self, id: FileId, live: bool) {
        let key = id_key(FILE_LIVE_PREFIX, id.0);
        if live {
            self.put(key, Vec::new());
        } else {
            self.delete(key);
        }
    }

    pub fn symbol_id_or_assign(&mut self, record: &SymbolRecord) -> Result<SymbolId> {
        if let Some(id) = self.symbol_id(record)? {
            return Ok(id);
        }
        let id = SymbolId(self.take_counter(META_NEXT_SYMBOL)?);
        let encoded = record.encode();
        self.put(
            bytes_key(SYMBOL_KEY_PREFIX, &encoded),
            id.0.to_be_bytes().to_vec(),
        );
        self.put(id_key(SYMBOL_RECORD_PREFIX, id.0), encoded);
        Ok(id)
    }

    pub fn set_symbol_live(&mut self, id: SymbolId, file: FileId, live: bool) {
        let live_key = id_key(SYMBOL_LIVE_PREFIX, id.0);
        let file_key = file_symbol_key(file.0, id.0);
        if live {
            self.put(live_key, Vec::new());
            self.put(file_key, Vec::new());
        } else {
            self.delete(live_key);
            self.delete(file_key);
        }
    }
}

/// Handle over an opened index directory (or an in-memory store).
pub struct Store {
    backend: Box<dyn KvBackend>,
    writer: Mutex<()>,
    dir: Option<PathBuf>,
}

impl Store {
    /// Opens (creating on first use) the store in `dir`.
    pub fn open(dir: impl AsRef<Path>) -> Result<Store> {
        let dir = dir.as_ref();
        let backend = RedbBackend::open(dir)?;
        let store = Store {
            backend: Box::new(backend),
            writer: Mutex::new(()),
            dir: Some(dir.to_path_buf()),
        };
        store.init_header()?;
        Ok(store)
    }

    pub fn in_memory() -> Store {
        Self::with_backend(Box::new(MemoryBackend::new())).expect("memory store init")
    }

    pub fn with_backend(backend: Box<dyn KvBackend>) -> Result<Store> {
        let store = Store {
            backend,
            writer: Mutex::new(()),
            dir: None,
        };
        store.init_header()?;
        Ok(store)
    }

    fn init_header(&self) -> Result<()> {
        let reader = self.reader()?;
        match reader.get(META_HEADER)? {
            Some(h) => check_header(&h),
            None => {
                let mut any = false;
                reader.scan_prefix(&[], &mut |_, _| {
                    any = true;
                    false
                })?;
                if any {
                    return Err(Error::CorruptStore("missing header record".into()));
                }
                drop(reader);
                let mut header = MAGIC.to_vec();
                header.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
                let mut m = Mutations::new();
                m.insert(META_HEADER.to_vec(), Some(header));
                self.backend.write(&m)
            }
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn reader(&self) -> Result<StoreReader<'_>> {
        Ok(StoreReader {
            inner: self.backend.reader()?,
        })
    }

    /// Opens the single write batch. Blocks while another batch is open.
    pub fn begin(&self) -> Result<StoreBatch<'_>> {
        let guard = self
            .writer
            .lock()
            .map_err(|_| Error::Backend("writer lock poisoned".into()))?;
        Ok(StoreBatch {
            base: self.reader()?,
            staged: Mutations::new(),
            posting_mutations: 0,
            symbol_posting_mutations: 0,
            _writer: guard,
        })
    }

    /// Makes every staged mutation durable in one atomic write.
    pub fn commit_batch(&self, batch: StoreBatch<'_>) -> Result<()> {
        let StoreBatch {
            base,
            staged,
            _writer,
            ..
        } = batch;
        drop(base);
        if staged.is_empty() {
            return Ok(());
        }
        self.backend.write(&staged)
    }

    pub fn disk_bytes(&self) -> Result<u64> {
        self.backend.disk_bytes()
    }
}

fn check_header(h: &[u8]) -> Result<()> {
    if h.len() != 8 || &h[..4] != MAGIC {
        return Err(Error::CorruptStore("bad magic".into()));
    }
    let version = u32::from_le_bytes(h[4..8].try_into().expect("length checked"));
    if version != FORMAT_VERSION {
        return Err(Error::CorruptStore(format!(
            "unsupported format version {version}"
        )));
    }
    Ok(())
}
