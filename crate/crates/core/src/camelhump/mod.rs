//! CamelHump symbol search.
//!
//! Symbols are split into humps, and every successor chain of three hump
//! characters is stored (lowercased) in the symbol-posting namespace. A query
//! intersects the posting lists of its own trigrams, confirms each candidate
//! with [`match_symbol`], and orders the survivors by [`rank_key`].

pub mod extract;
pub mod humps;
pub mod matcher;

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

pub use extract::extract_symbols;
pub use humps::{fold, generate_hump_trigrams, split_humps, trigrams_from, HumpSplit};
pub use matcher::{align, match_symbol, pattern_chars, rank_key, AlignmentScore, MatchDetail, RankKey};

use crate::error::Result;
use crate::store::{FileId, IndexView, SymbolId};
use crate::text_model::Trigram;
use crate::varint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Class,
    Function,
    Field,
    Other,
}

impl SymbolKind {
    pub fn to_byte(self) -> u8 {
        match self {
            SymbolKind::Class => 0,
            SymbolKind::Function => 1,
            SymbolKind::Field => 2,
            SymbolKind::Other => 3,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0 => SymbolKind::Class,
            1 => SymbolKind::Function,
            2 => SymbolKind::Field,
            3 => SymbolKind::Other,
            _ => return None,
        })
    }
}

/// A named declaration at a 1-based line of a file.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SymbolRecord {
    pub name: String,
    pub file: FileId,
    pub line: u32,
    pub kind: SymbolKind,
}

impl SymbolRecord {
    /// `varint name length ‖ UTF-8 name ‖ varint file id ‖ varint line ‖ kind byte`
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        varint::put_u64(out, self.name.len() as u64);
        out.extend_from_slice(self.name.as_bytes());
        varint::put_u64(out, self.file.0);
        varint::put_u64(out, u64::from(self.line));
        out.push(self.kind.to_byte());
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.name.len() + 8);
        self.encode_into(&mut out);
        out
    }

    pub fn read_from(r: &mut varint::Reader<'_>) -> Option<Self> {
        let len = usize::try_from(r.u64()?).ok()?;
        let name = std::str::from_utf8(r.bytes(len)?).ok()?.to_string();
        let file = FileId(r.u64()?);
        let line = u32::try_from(r.u64()?).ok()?;
        let kind = SymbolKind::from_byte(r.u8()?)?;
        Some(SymbolRecord {
            name,
            file,
            line,
            kind,
        })
    }

    pub fn decode(bytes: &[u8]) -> Option<Self> {
        let mut r = varint::Reader::new(bytes);
        let rec = Self::read_from(&mut r)?;
        r.is_empty().then_some(rec)
    }

    /// Trigrams this symbol contributes to the symbol-posting namespace.
    pub fn hump_trigrams(&self) -> BTreeSet<Trigram> {
        generate_hump_trigrams(&split_humps(&self.name))
    }
}

/// Sliding-window trigrams of the folded pattern, underscores removed.
pub fn query_trigrams(pattern: &str) -> Vec<Trigram> {
    let chars: Vec<char> = pattern_chars(pattern).into_iter().map(fold).collect();
    let mut seen = HashSet::new();
    chars
        .windows(3)
        .map(|w| Trigram::new(w[0], w[1], w[2]))
        .filter(|t| seen.insert(*t))
        .collect()
}

/// Candidate symbols for a pattern: intersection of the symbol-posting lists
/// of its trigrams, rarest list first. `None` when the pattern is too short
/// for the index.
pub fn candidate_symbols(view: &impl IndexView, pattern: &str) -> Result<Option<Vec<SymbolId>>> {
    let trigrams = query_trigrams(pattern);
    if trigrams.is_empty() {
        return Ok(None);
    }
    let mut lists = Vec::with_capacity(trigrams.len());
    for t in &trigrams {
        let ids: Vec<SymbolId> = view.symbols_for_trigram(t)?.into_iter().map(|(s, _)| s).collect();
        if ids.is_empty() {
            return Ok(Some(Vec::new()));
        }
        lists.push(ids);
    }
    lists.sort_by_key(Vec::len);
    let mut acc = lists[0].clone();
    for list in &lists[1..] {
        acc = crate::fulltext_search::intersect_sorted(&acc, list);
        if acc.is_empty() {
            break;
        }
    }
    Ok(Some(acc))
}

/// Ranked CamelHump matches among the active revision's symbols.
pub fn symbol_search(view: &impl IndexView, pattern: &str, limit: usize) -> Result<Vec<MatchDetail>> {
    if pattern_chars(pattern).is_empty() {
        return Ok(Vec::new());
    }
    let candidates: Vec<(SymbolId, SymbolRecord)> = match candidate_symbols(view, pattern)? {
        Some(ids) => {
            let mut out = Vec::with_capacity(ids.len());
            for id in ids {
                if let Some(rec) = view.symbol_record(id)? {
                    out.push((id, rec));
                }
            }
            out
        }
        None => view.live_symbols()?,
    };

    let mut paths = std::collections::HashMap::new();
    let mut found = Vec::new();
    for (_, rec) in candidates {
        let path = match paths.get(&rec.file) {
            Some(p) => p,
            None => {
                let p = view.file_path(rec.file)?.unwrap_or_default();
                paths.entry(rec.file).or_insert(p)
            }
        };
        if let Some(d) = match_symbol(pattern, &rec, path) {
            found.push((rank_key(&d), d));
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    found.truncate(limit);
    Ok(found.into_iter().map(|(_, d)| d).collect())
}
