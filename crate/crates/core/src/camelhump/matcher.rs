//! Pattern-to-symbol alignment and relevance ordering.
//!
//! A pattern matches a symbol when it is a concatenation of non-empty
//! prefixes of humps taken in order. Humps between two chosen humps are
//! "skipped"; humps before the first chosen one are not counted as skipped
//! but lose the first-letter bonus.

use std::cmp::Reverse;

use serde::Serialize;

use super::humps::{fold, split_humps, HumpSplit};
use super::SymbolRecord;

/// Best alignment of a pattern against one symbol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchDetail {
    pub symbol: SymbolRecord,
    pub path: String,
    /// For every pattern character (underscores removed): (hump, offset).
    pub hump_assignment: Vec<(usize, usize)>,
    pub skipped_humps: u32,
    pub first_letter_match: bool,
    pub case_matches: u32,
    pub total_humps: u32,
}

/// Lexicographic relevance key; smaller sorts first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RankKey {
    pub skipped_humps: u32,
    pub first_letter_miss: bool,
    pub case_matches: Reverse<u32>,
    pub total_humps: u32,
    pub name_len: usize,
    pub name: String,
    pub path: String,
    pub line: u32,
}

pub fn rank_key(d: &MatchDetail) -> RankKey {
    RankKey {
        skipped_humps: d.skipped_humps,
        first_letter_miss: !d.first_letter_match,
        case_matches: Reverse(d.case_matches),
        total_humps: d.total_humps,
        name_len: d.symbol.name.chars().count(),
        name: d.symbol.name.clone(),
        path: d.path.clone(),
        line: d.symbol.line,
    }
}

/// Pattern characters that take part in matching (underscores dropped).
pub fn pattern_chars(pattern: &str) -> Vec<char> {
    pattern.chars().filter(|&c| c != '_').collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlignmentScore {
    pub skipped_humps: u32,
    pub first_letter_match: bool,
    pub case_matches: u32,
}

impl AlignmentScore {
    fn key(&self) -> (u32, bool, Reverse<u32>) {
        (
            self.skipped_humps,
            !self.first_letter_match,
            Reverse(self.case_matches),
        )
    }
}

#[derive(Clone, Copy)]
struct Step {
    skips: u32,
    cases: u32,
    take: usize,
    next_hump: Option<usize>,
}

/// Memoized DP: `solve(j, i)` = best way to consume `pattern[j..]` given
/// hump `i` is used next, starting at its first character.
struct Aligner<'a> {
    pattern: &'a [char],
    humps: &'a [Vec<char>],
    memo: Vec<Option<Option<Step>>>,
}

impl<'a> Aligner<'a> {
    fn new(pattern: &'a [char], humps: &'a [Vec<char>]) -> Self {
        Aligner {
            pattern,
            humps,
            memo: vec![None; pattern.len() * humps.len()],
        }
    }

    fn solve(&mut self, j: usize, i: usize) -> Option<Step> {
        let slot = j * self.humps.len() + i;
        if let Some(cached) = self.memo[slot] {
            return cached;
        }
        let result = self.compute(j, i);
        self.memo[slot] = Some(result);
        result
    }

    fn compute(&mut self, j: usize, i: usize) -> Option<Step> {
        let hump = &self.humps[i];
        let m = self.pattern.len();
        let start_case = {
            let p = self.pattern[j];
            u32::from(p.is_alphabetic() && p == hump[0])
        };
        let mut best: Option<Step> = None;
        let better = |cand: &Step, best: &Option<Step>| match best {
            None => true,
            Some(b) => (cand.skips, Reverse(cand.cases)) < (b.skips, Reverse(b.cases)),
        };
        let mut take = 0;
        while take < hump.len() && j + take < m && fold(self.pattern[j + take]) == fold(hump[take])
        {
            take += 1;
            if j + take == m {
                let cand = Step {
                    skips: 0,
                    cases: start_case,
                    take,
                    next_hump: None,
                };
                if better(&cand, &best) {
                    best = Some(cand);
                }
                continue;
            }
            for next in i + 1..self.humps.len() {
                if let Some(rest) = self.solve(j + take, next) {
                    let cand = Step {
                        skips: rest.skips + (next - i - 1) as u32,
                        cases: rest.cases + start_case,
                        take,
                        next_hump: Some(next),
                    };
                    if better(&cand, &best) {
                        best = Some(cand);
                    }
                }
            }
        }
        best
    }
}

/// Aligns `pattern` (underscores already removed) against `split`.
///
/// Among all alignments the one with the fewest skipped humps wins, then one
/// starting at the first hump, then the most case matches at hump starts.
pub fn align(pattern: &[char], split: &HumpSplit) -> Option<(AlignmentScore, Vec<(usize, usize)>)> {
    let humps = split.humps();
    if pattern.is_empty() || humps.is_empty() {
        return None;
    }
    let mut aligner = Aligner::new(pattern, humps);
    let mut best: Option<(AlignmentScore, usize)> = None;
    for first in 0..humps.len() {
        if let Some(step) = aligner.solve(0, first) {
            let score = AlignmentScore {
                skipped_humps: step.skips,
                first_letter_match: first == 0,
                case_matches: step.cases,
            };
            if best.is_none_or(|(b, _)| score.key() < b.key()) {
                best = Some((score, first));
            }
        }
    }
    let (score, first) = best?;

    let mut assignment = Vec::with_capacity(pattern.len());
    let (mut j, mut hump) = (0, Some(first));
    while let Some(i) = hump {
        let step = aligner.solve(j, i).expect("memoized step on best path");
        assignment.extend((0..step.take).map(|o| (i, o)));
        j += step.take;
        hump = step.next_hump;
    }
    debug_assert_eq!(assignment.len(), pattern.len());
    Some((score, assignment))
}

/// Matches `pattern` against `symbol`; `None` when no alignment exists.
pub fn match_symbol(pattern: &str, symbol: &SymbolRecord, path: &str) -> Option<MatchDetail> {
    let split = split_humps(&symbol.name);
    let chars = pattern_chars(pattern);
    let (score, hump_assignment) = align(&chars, &split)?;
    Some(MatchDetail {
        symbol: symbol.clone(),
        path: path.to_string(),
        hump_assignment,
        skipped_humps: score.skipped_humps,
        first_letter_match: score.first_letter_match,
        case_matches: score.case_matches,
        total_humps: split.len() as u32,
    })
}
