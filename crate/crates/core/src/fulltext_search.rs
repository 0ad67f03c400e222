//! Exact substring search over the active revision.
//!
//! Candidates come from intersecting the posting lists of the pattern's
//! trigrams (rarest first); each candidate file is then scanned with the
//! Z-function. Both sides compare normalized text, so a space in the
//! pattern matches a tab in a file and vice versa.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::store::keys::NS_POSTINGS;
use crate::store::{FileId, IndexView};
use crate::text_model::{normalized_chars, Trigram};

/// Intersection of two ascending, duplicate-free slices.
pub fn intersect_sorted<T: Ord + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Distinct trigrams of the normalized pattern, in first-seen order.
pub fn pattern_trigrams(pattern: &str) -> Vec<Trigram> {
    let chars = normalized_chars(pattern);
    let mut out: Vec<Trigram> = Vec::new();
    for w in chars.windows(3) {
        let t = Trigram::new(w[0], w[1], w[2]);
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// Files holding every trigram of the pattern. `None` when the pattern has
/// fewer than three characters and the index cannot help.
pub fn candidate_files(view: &impl IndexView, pattern: &str) -> Result<Option<Vec<FileId>>> {
    let trigrams = pattern_trigrams(pattern);
    if trigrams.is_empty() {
        return Ok(None);
    }
    let mut sized = Vec::with_capacity(trigrams.len());
    for t in trigrams {
        let n = view.posting_list_len(NS_POSTINGS, &t)?;
        if n == 0 {
            return Ok(Some(Vec::new()));
        }
        sized.push((n, t));
    }
    sized.sort();
    let mut acc: Vec<FileId> = view
        .files_for_trigram(&sized[0].1)?
        .into_iter()
        .map(|(f, _)| f)
        .collect();
    for (_, t) in &sized[1..] {
        if acc.is_empty() {
            break;
        }
        let next: Vec<FileId> = view.files_for_trigram(t)?.into_iter().map(|(f, _)| f).collect();
        acc = intersect_sorted(&acc, &next);
    }
    Ok(Some(acc))
}

/// Z-array of `s`: `z[i]` is the length of the longest common prefix of
/// `s` and `s[i..]`; `z[0] = 0`.
pub fn z_function<T: PartialEq>(s: &[T]) -> Vec<usize> {
    let n = s.len();
    let mut z = vec![0; n];
    let (mut l, mut r) = (0, 0);
    for i in 1..n {
        if i < r {
            z[i] = (r - i).min(z[i - l]);
        }
        while i + z[i] < n && s[z[i]] == s[i + z[i]] {
            z[i] += 1;
        }
        if i + z[i] > r {
            l = i;
            r = i + z[i];
        }
    }
    z
}

/// Char offsets of every (possibly overlapping) occurrence of `needle` in
/// `hay`, in O(n + m).
pub fn find_all(hay: &[char], needle: &[char]) -> Vec<usize> {
    const SEP: u32 = 0x110000;
    if needle.is_empty() || needle.len() > hay.len() {
        return Vec::new();
    }
    let m = needle.len();
    let joined: Vec<u32> = needle
        .iter()
        .map(|&c| c as u32)
        .chain(std::iter::once(SEP))
        .chain(hay.iter().map(|&c| c as u32))
        .collect();
    z_function(&joined)
        .into_iter()
        .enumerate()
        .skip(m + 1)
        .filter(|&(_, z)| z >= m)
        .map(|(i, _)| i - m - 1)
        .collect()
}

/// 1-based (line, column) of every occurrence of `pattern` in `content`;
/// columns count Unicode scalars.
pub fn verify(content: &str, pattern: &str) -> Vec<(u32, u32)> {
    let hay = normalized_chars(content);
    let offsets = find_all(&hay, &normalized_chars(pattern));
    let mut out = Vec::with_capacity(offsets.len());
    let (mut line, mut line_start, mut pos) = (1u32, 0usize, 0usize);
    for off in offsets {
        while pos < off {
            if hay[pos] == '\n' {
                line += 1;
                line_start = pos + 1;
            }
            pos += 1;
        }
        out.push((line, (off - line_start + 1) as u32));
    }
    out
}

/// Where search reads file contents from.
pub trait ContentSource {
    /// Content of `path` in the active revision; `None` if unavailable.
    fn read(&self, path: &str) -> Result<Option<String>>;
}

impl ContentSource for BTreeMap<String, String> {
    fn read(&self, path: &str) -> Result<Option<String>> {
        Ok(self.get(path).cloned())
    }
}

/// Files under a working tree.
pub struct DirSource {
    root: PathBuf,
}

impl DirSource {
    pub fn new(root: impl AsRef<Path>) -> Self {
        DirSource {
            root: root.as_ref().to_path_buf(),
        }
    }
}

impl ContentSource for DirSource {
    fn read(&self, path: &str) -> Result<Option<String>> {
        match std::fs::read(self.root.join(path)) {
            Ok(bytes) => Ok(Some(String::from_utf8_lossy(&bytes).into_owned())),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::Io(e)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchResult {
    pub path: String,
    pub occurrences: Vec<(u32, u32)>,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub results: Vec<MatchResult>,
    /// Set when `limit` cut the result list short.
    pub truncated: bool,
    /// Files whose content was scanned.
    pub files_scanned: usize,
}

/// Occurrences of `pattern` in the active revision, ordered by path and
/// position. At most `limit` occurrences are returned in total.
pub fn search(
    view: &impl IndexView,
    source: &dyn ContentSource,
    pattern: &str,
    limit: usize,
) -> Result<SearchOutcome> {
    if pattern.is_empty() {
        return Err(Error::InvalidPattern("empty pattern".into()));
    }
    let files: Vec<FileId> = match candidate_files(view, pattern)? {
        Some(ids) => ids,
        None => view.live_files()?.into_iter().map(|(id, _)| id).collect(),
    };
    let mut paths = Vec::with_capacity(files.len());
    for id in files {
        let path = view
            .file_path(id)?
            .ok_or_else(|| Error::CorruptStore(format!("file {} unregistered", id.0)))?;
        paths.push(path);
    }
    paths.sort();

    let mut outcome = SearchOutcome::default();
    let mut budget = limit;
    for path in paths {
        let Some(content) = source.read(&path)? else {
            continue;
        };
        outcome.files_scanned += 1;
        let mut occurrences = verify(&content, pattern);
        if occurrences.is_empty() {
            continue;
        }
        if budget == 0 {
            outcome.truncated = true;
            break;
        }
        if occurrences.len() > budget {
            occurrences.truncate(budget);
            outcome.truncated = true;
        }
        budget -= occurrences.len();
        outcome.results.push(MatchResult {
            path,
            count: occurrences.len(),
            occurrences,
        });
        if outcome.truncated {
            break;
        }
    }
    Ok(outcome)
}
