use std::collections::BTreeSet;

use crate::text_model::Trigram;

/// Case folding used everywhere on the CamelHump side.
#[inline]
pub fn fold(c: char) -> char {
    c.to_lowercase().next().unwrap_or(c)
}

/// An identifier cut into humps. Underscores separate humps and are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HumpSplit {
    humps: Vec<Vec<char>>,
}

impl HumpSplit {
    pub fn humps(&self) -> &[Vec<char>] {
        &self.humps
    }

    pub fn len(&self) -> usize {
        self.humps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.humps.is_empty()
    }

    pub fn hump_strings(&self) -> Vec<String> {
        self.humps.iter().map(|h| h.iter().collect()).collect()
    }

    /// Characters across all humps.
    pub fn char_len(&self) -> usize {
        self.humps.iter().map(Vec::len).sum()
    }

    pub fn from_humps<S: AsRef<str>>(humps: &[S]) -> Self {
        HumpSplit {
            humps: humps
                .iter()
                .map(|h| h.as_ref().chars().collect::<Vec<_>>())
                .filter(|h| !h.is_empty())
                .collect(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Letter,
    Digit,
    Other,
}

fn class_of(c: char) -> Class {
    if c.is_ascii_digit() || c.is_numeric() {
        Class::Digit
    } else if c.is_alphabetic() {
        Class::Letter
    } else {
        Class::Other
    }
}

/// Boundaries fall before every uppercase letter, at every underscore, and
/// wherever a letter meets a digit.
pub fn split_humps(name: &str) -> HumpSplit {
    let mut humps: Vec<Vec<char>> = Vec::new();
    let mut current: Vec<char> = Vec::new();
    let mut prev: Option<Class> = None;
    for c in name.chars() {
        if c == '_' {
            if !current.is_empty() {
                humps.push(std::mem::take(&mut current));
            }
            prev = None;
            continue;
        }
        let class = class_of(c);
        let boundary = c.is_uppercase()
            || matches!(
                (prev, class),
                (Some(Class::Letter), Class::Digit) | (Some(Class::Digit), Class::Letter)
            );
        if boundary && !current.is_empty() {
            humps.push(std::mem::take(&mut current));
        }
        current.push(c);
        prev = Some(class);
    }
    if !current.is_empty() {
        humps.push(current);
    }
    HumpSplit { humps }
}

/// Chains of length three starting at `(hump, offset)`, lowercased.
///
/// From any position the successors are the next character of the same hump
/// and the first character of the next hump, so at most four chains start at
/// each position.
pub fn trigrams_from(split: &HumpSplit, hump: usize, offset: usize) -> Vec<Trigram> {
    let humps = &split.humps;
    let succ = |h: usize, o: usize| {
        let same = (o + 1 < humps[h].len()).then_some((h, o + 1));
        let next = (h + 1 < humps.len()).then_some((h + 1, 0));
        same.into_iter().chain(next)
    };
    let at = |(h, o): (usize, usize)| fold(humps[h][o]);
    let mut out = Vec::with_capacity(4);
    for p1 in succ(hump, offset) {
        for p2 in succ(p1.0, p1.1) {
            out.push(Trigram::new(at((hump, offset)), at(p1), at(p2)));
        }
    }
    out
}

/// Union of [`trigrams_from`] over every position of the name.
pub fn generate_hump_trigrams(split: &HumpSplit) -> BTreeSet<Trigram> {
    let mut out = BTreeSet::new();
    for (h, hump) in split.humps.iter().enumerate() {
        for o in 0..hump.len() {
            out.extend(trigrams_from(split, h, o));
        }
    }
    out
}
