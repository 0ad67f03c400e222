//! Ordered key-value backend interface and the in-memory binding.

use std::collections::BTreeMap;
use std::ops::Bound;
use std::sync::{RwLock, RwLockReadGuard};

use crate::error::{Error, Result};

/// Staged mutations, ordered by key. `None` deletes.
pub type Mutations = BTreeMap<Vec<u8>, Option<Vec<u8>>>;

/// A consistent read view over the backend.
pub trait KvRead {
    fn get(&self, key: &[u8]) -> Result<Option<Vec<u8>>>;

    /// Visits every entry whose key starts with `prefix`, in key order, until
    /// `visit` returns `false`.
    fn scan_prefix(
        &self,
        prefix: &[u8],
        visit: &mut dyn FnMut(&[u8], &[u8]) -> bool,
    ) -> Result<()>;
}

/// Any embedded ordered store with atomic multi-key writes and prefix scans.
pub trait KvBackend: Send + Sync {
    fn reader(&self) -> Result<Box<dyn KvRead + '_>>;

    /// Applies all mutations atomically: either every one is durable or none.
    fn write(&self, mutations: &Mutations) -> Result<()>;

    /// Bytes the backend occupies on disk (0 for memory).
    fn disk_bytes(&self) -> Result<u64>;
}

/// Smallest key strictly greater than every key with the given prefix.
pub(crate) fn prefix_end(prefix: &[u8]) -> Option<Vec<u8>> {
    let mut end = prefix.to_vec();
    while let Some(last) = end.pop() {
        if last < 0xff {
            end.push(last + 1);
            return Some(end);
        }
    }
    None
}

pub(crate) fn prefix_range(prefix: &[u8]) -> (Bound<Vec<u8>>, Bound<Vec<u8>>) {
    let upper = match prefix_end(prefix) {
        Some(end) => Bound::Excluded(end),
        None => Bound::Unbounded,
    };
    (Bound::Included(prefix.to_vec()), upper)
}

/// Test and scratch binding: a `BTreeMap` behind a lock.
#[derive(Default)]
pub struct MemoryBackend {
    map: RwLock<BTreeMap<Vec<u8>, Vec<u8>>>,
}

impl MemoryBackend {
    pub fn new() -> Self {
        Self::default()
    }
}

struct MemoryReader<'a> {
    guard: RwLockReadGuard<'a, BTreeMap<Vec<u8>, Vec<u8>>>,
}

impl KvRead for MemoryReader<'_> {
    fn get(&self, key: &[u8]) -> Result<Option<Vec<u8>>> {
        Ok(self.guard.get(key).cloned())
    }

    fn scan_prefix(
        &self,
        prefix: &[u8],
        visit: &mut dyn FnMut(&[u8], &[u8]) -> bool,
    ) -> Result<()> {
        for (k, v) in self.guard.range(prefix_range(prefix)) {
            if !visit(k, v) {
                break;
            }
        }
        Ok(())
    }
}

impl KvBackend for MemoryBackend {
    fn reader(&self) -> Result<Box<dyn KvRead + '_>> {
        let guard = self
            .map
            .read()
            .map_err(|_| Error::Backend("memory store lock poisoned".into()))?;
        Ok(Box::new(MemoryReader { guard }))
    }

    fn write(&self, mutations: &Mutations) -> Result<()> {
        let mut map = self
            .map
            .write()
            .map_err(|_| Error::Backend("memory store lock poisoned".into()))?;
        for (k, v) in mutations {
            match v {
                Some(v) => map.insert(k.clone(), v.clone()),
                None => map.remove(k),
            };
        }
        Ok(())
    }

    fn disk_bytes(&self) -> Result<u64> {
        Ok(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_end_carries() {
        assert_eq!(prefix_end(b"ab"), Some(b"ac".to_vec()));
        assert_eq!(prefix_end(&[1, 0xff]), Some(vec![2]));
        assert_eq!(prefix_end(&[0xff, 0xff]), None);
    }

    #[test]
    fn memory_scan_respects_prefix() {
        let be = MemoryBackend::new();
        let mut m = Mutations::new();
        for k in [&b"a1"[..], b"b1", b"b2", b"c"] {
            m.insert(k.to_vec(), Some(k.to_vec()));
        }
        be.write(&m).unwrap();
        let r = be.reader().unwrap();
        let mut seen = Vec::new();
        r.scan_prefix(b"b", &mut |k, _| {
            seen.push(k.to_vec());
            true
        })
        .unwrap();
        assert_eq!(seen, vec![b"b1".to_vec(), b"b2".to_vec()]);
    }
}
