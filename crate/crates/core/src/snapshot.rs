//! Turning raw file bytes into indexable text.

use std::path::Path;

use crate::delta::Snapshot;
use crate::error::{Error, Result};

/// Files larger than this are not indexed.
pub const MAX_FILE_BYTES: usize = 5 * 1024 * 1024;

/// A NUL byte in this many leading bytes marks a file as binary.
pub const BINARY_SNIFF_BYTES: usize = 8000;

pub fn is_indexable(bytes: &[u8]) -> bool {
    bytes.len() <= MAX_FILE_BYTES && !bytes[..bytes.len().min(BINARY_SNIFF_BYTES)].contains(&0)
}

/// Decoded text, or `None` for binary and oversized content. Invalid UTF-8
/// is replaced with U+FFFD.
pub fn decode_text(bytes: &[u8]) -> Option<String> {
    is_indexable(bytes).then(|| String::from_utf8_lossy(bytes).into_owned())
}

/// Snapshot of a working directory. `.git` is skipped, symlinks are not
/// followed, and paths use `/` separators.
pub fn snapshot_dir(root: &Path) -> Result<Snapshot> {
    let mut out = Snapshot::new();
    let walker = walkdir::WalkDir::new(root)
        .follow_links(false)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || e.file_name() != ".git");
    for entry in walker {
        let entry = entry.map_err(|e| Error::Other(format!("walking {}: {e}", root.display())))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .map_err(|e| Error::Other(e.to_string()))?;
        let path: Vec<String> = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        if let Some(text) = decode_text(&std::fs::read(entry.path())?) {
            out.insert(path.join("/"), text);
        }
    }
    Ok(out)
}
