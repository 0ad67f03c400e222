//! Trigram extraction and text normalization shared by indexing and search.
//!
//! A trigram is a window of three Unicode scalar values. The only
//! normalization is TAB → SPACE; line breaks, case and everything else are
//! kept verbatim, so full-text trigrams are case-sensitive.

use std::collections::HashMap;
use std::fmt;

/// Width of the canonical on-disk trigram encoding: three big-endian `u32`s.
pub const TRIGRAM_BYTES: usize = 12;

/// Three normalized characters; the atom of every index key.
///
/// Ordering matches the byte order of [`Trigram::to_bytes`], so ranges over
/// encoded keys visit trigrams in `Ord` order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trigram([char; 3]);

impl Trigram {
    /// Builds a trigram, applying the TAB → SPACE rule to each unit.
    pub fn new(a: char, b: char, c: char) -> Self {
        Trigram([normalize_char(a), normalize_char(b), normalize_char(c)])
    }

    /// Parses a string of exactly three characters.
    pub fn from_str_exact(s: &str) -> Option<Self> {
        let mut it = s.chars();
        let t = Trigram::new(it.next()?, it.next()?, it.next()?);
        it.next().is_none().then_some(t)
    }

    pub fn chars(&self) -> [char; 3] {
        self.0
    }

    pub fn to_bytes(&self) -> [u8; TRIGRAM_BYTES] {
        let mut out = [0u8; TRIGRAM_BYTES];
        for (i, c) in self.0.iter().enumerate() {
            out[i * 4..i * 4 + 4].copy_from_slice(&(*c as u32).to_be_bytes());
        }
        out
    }

    /// Decodes the 12-byte canonical form. Rejects non-scalar values and raw TABs.
    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != TRIGRAM_BYTES {
            return None;
        }
        let mut units = ['\0'; 3];
        for (i, unit) in units.iter_mut().enumerate() {
            let raw = u32::from_be_bytes(bytes[i * 4..i * 4 + 4].try_into().ok()?);
            let c = char::from_u32(raw)?;
            if c == '\t' {
                return None;
            }
            *unit = c;
        }
        Some(Trigram(units))
    }

    /// True when every unit is alphabetic.
    pub fn is_alphabetic(&self) -> bool {
        self.0.iter().all(|c| c.is_alphabetic())
    }
}

impl fmt::Display for Trigram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Trigram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Trigram({:?})", self.to_string())
    }
}

#[inline]
fn normalize_char(c: char) -> char {
    if c == '\t' {
        ' '
    } else {
        c
    }
}

/// Replaces every TAB with a single SPACE. Length in characters is unchanged.
pub fn normalize(text: &str) -> String {
    text.chars().map(normalize_char).collect()
}

/// Normalized text as a vector of scalar values.
pub fn normalized_chars(text: &str) -> Vec<char> {
    text.chars().map(normalize_char).collect()
}

/// Multiset of trigrams with strictly positive counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrigramBag {
    counts: HashMap<Trigram, u32>,
}

impl TrigramBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, t: &Trigram) -> u32 {
        self.counts.get(t).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| u64::from(c)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Trigram, u32)> {
        self.counts.iter().map(|(t, &c)| (t, c))
    }

    /// Entries sorted by trigram.
    pub fn sorted(&self) -> Vec<(Trigram, u32)> {
        let mut v: Vec<_> = self.counts.iter().map(|(t, &c)| (*t, c)).collect();
        v.sort_unstable_by_key(|(t, _)| *t);
        v
    }

    /// Adds `by` (which may be negative) to a trigram's count.
    ///
    /// Returns `false` and leaves the bag untouched if the result would be
    /// negative.
    pub fn adjust(&mut self, t: Trigram, by: i64) -> bool {
        let cur = i64::from(self.get(&t));
        let next = cur + by;
        if next < 0 || next > i64::from(u32::MAX) {
            return false;
        }
        if next == 0 {
            self.counts.remove(&t);
        } else {
            self.counts.insert(t, next as u32);
        }
        true
    }

    /// Applies a signed diff. Fails without partial effects on underflow.
    pub fn apply_diff(&mut self, diff: &[(Trigram, i64)]) -> bool {
        if diff
            .iter()
            .any(|(t, d)| i64::from(self.get(t)) + d < 0)
        {
            return false;
        }
        for (t, d) in diff {
            self.adjust(*t, *d);
        }
        true
    }
}

impl FromIterator<(Trigram, u32)> for TrigramBag {
    fn from_iter<I: IntoIterator<Item = (Trigram, u32)>>(iter: I) -> Self {
        let mut bag = TrigramBag::new();
        for (t, c) in iter {
            bag.adjust(t, i64::from(c));
        }
        bag
    }
}

/// Sliding window of width 3 over `normalize(text)`.
pub fn extract_trigrams(text: &str) -> TrigramBag {
    let chars = normalized_chars(text);
    let mut counts: HashMap<Trigram, u32> = HashMap::with_capacity(chars.len() / 4);
    for w in chars.windows(3) {
        *counts.entry(Trigram([w[0], w[1], w[2]])).or_insert(0) += 1;
    }
    TrigramBag { counts }
}

/// Distinct trigrams of `normalize(text)`, in first-occurrence order.
pub fn distinct_trigrams(text: &str) -> Vec<Trigram> {
    let chars = normalized_chars(text);
    let mut seen = std::collections::HashSet::new();
    chars
        .windows(3)
        .map(|w| Trigram([w[0], w[1], w[2]]))
        .filter(|t| seen.insert(*t))
        .collect()
}

/// Signed per-trigram change turning `old` into `new`, sorted by trigram.
/// Zero changes are omitted.
pub fn bag_diff(old: &TrigramBag, new: &TrigramBag) -> Vec<(Trigram, i64)> {
    let mut out: Vec<(Trigram, i64)> = Vec::new();
    for (t, c) in old.iter() {
        let d = i64::from(new.get(t)) - i64::from(c);
        if d != 0 {
            out.push((*t, d));
        }
    }
    for (t, c) in new.iter() {
        if old.get(t) == 0 {
            out.push((*t, i64::from(c)));
        }
    }
    out.sort_unstable_by_key(|(t, _)| *t);
    out
}
