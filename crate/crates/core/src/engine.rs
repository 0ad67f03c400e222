//! High-level operations over one store, shared by the CLI and the C API.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::camelhump::{symbol_search, MatchDetail};
use crate::error::{Error, Result};
use crate::fulltext_search::{search, ContentSource, DirSource, SearchOutcome};
use crate::git::{list_files, GitRepo, Oid, RepoAccess};
use crate::git_ingest::{build_index_from_path, IngestStats};
use crate::revision_tree::{self, CheckoutStats, CommitOutcome, RevisionId};
use crate::snapshot::{decode_text, snapshot_dir};
use crate::store::keys::{NS_POSTINGS, NS_SYMBOL_POSTINGS, META_ORIGIN};
use crate::store::{IndexView, Store};
use crate::text_model::Trigram;

/// Minimum length of a commit-id prefix.
pub const MIN_HEX_PREFIX: usize = 6;

pub struct Engine {
    store: Store,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CheckoutReport {
    #[serde(flatten)]
    pub stats: CheckoutStats,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrigramCount {
    pub trigram: String,
    pub count: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IndexStats {
    pub revisions: u64,
    pub active_revision: Option<RevisionId>,
    pub files: u64,
    pub unique_trigrams: u64,
    pub total_trigrams: u64,
    pub top_trigrams: Vec<TrigramCount>,
    pub top_alphabetic_trigrams: Vec<TrigramCount>,
    pub symbols: u64,
    pub unique_symbol_names: u64,
    pub symbol_name_chars: u64,
    pub hump_unique_trigrams: u64,
    pub hump_postings: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BenchSample {
    pub from: RevisionId,
    pub to: RevisionId,
    pub delta_trigrams: u64,
    pub millis: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub samples: Vec<BenchSample>,
    pub slope_ms_per_trigram: f64,
    pub intercept_ms: f64,
    pub r_squared: f64,
}

impl BenchReport {
    /// `delta_trigrams,millis` rows followed by the fit as comment lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta_trigrams,millis\n");
        for s in &self.samples {
            out.push_str(&format!("{},{:.4}\n", s.delta_trigrams, s.millis));
        }
        out.push_str(&format!("# slope_ms_per_trigram={:.9}\n", self.slope_ms_per_trigram));
        out.push_str(&format!("# intercept_ms={:.4}\n", self.intercept_ms));
        out.push_str(&format!("# r_squared={:.6}\n", self.r_squared));
        out
    }
}

/// Least-squares line through the points: (slope, intercept, R²).
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    if points.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    (slope, intercept, r2)
}

/// Files of one git commit, read from the object store on demand.
pub struct GitSource {
    repo: GitRepo,
    files: BTreeMap<String, Oid>,
}

impl GitSource {
    pub fn new(repo: GitRepo, commit: &Oid) -> Result<Self> {
        let tree = repo.commit(commit)?.tree;
        let files = list_files(&repo, &tree)?;
        Ok(GitSource { repo, files })
    }
}

impl ContentSource for GitSource {
    fn read(&self, path: &str) -> Result<Option<String>> {
        match self.files.get(path) {
            Some(oid) => Ok(decode_text(&self.repo.blob(oid)?)),
            None => Ok(None),
        }
    }
}

/// Resolves a revision id, or a unique commit-id prefix of at least
/// [`MIN_HEX_PREFIX`] hex digits.
pub fn resolve_revision(view: &impl IndexView, spec: &str) -> Result<RevisionId> {
    let spec = spec.trim();
    if spec.len() >= MIN_HEX_PREFIX && spec.chars().all(|c| c.is_ascii_hexdigit()) {
        let want = spec.to_ascii_lowercase();
        let hits: Vec<RevisionId> = view
            .commit_index()?
            .into_iter()
            .filter(|(oid, _)| hex::encode(oid).starts_with(&want))
            .map(|(_, rev)| rev)
            .collect();
        match hits.as_slice() {
            [rev] => return Ok(*rev),
            [] => {}
            _ => return Err(Error::UnresolvedRevision(format!("{spec} is ambiguous"))),
        }
    }
    if let Ok(n) = spec.parse::<u64>() {
        let rev = RevisionId(n);
        if revision_tree::node(view, rev)?.is_some() {
            return Ok(rev);
        }
        return Err(Error::UnknownRevision(rev));
    }
    Err(Error::UnresolvedRevision(spec.to_string()))
}

impl Engine {
    pub fn open(dir: impl AsRef<Path>) -> Result<Engine> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        Ok(Engine {
            store: Store::open(dir)?,
        })
    }

    pub fn in_memory() -> Engine {
        Engine {
            store: Store::in_memory(),
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn index_git(&self, repo: &Path, branch: &str) -> Result<IngestStats> {
        build_index_from_path(repo, branch, &self.store)
    }

    pub fn resolve(&self, spec: &str) -> Result<RevisionId> {
        resolve_revision(&self.store.reader()?, spec)
    }

    pub fn active_revision(&self) -> Result<Option<RevisionId>> {
        self.store.reader()?.active_revision()
    }

    pub fn revision_count(&self) -> Result<u64> {
        revision_tree::revision_count(&self.store.reader()?)
    }

    pub fn checkout(&self, rev: RevisionId) -> Result<CheckoutReport> {
        let started = Instant::now();
        let stats = revision_tree::checkout(&self.store, rev)?;
        Ok(CheckoutReport {
            stats,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    }

    /// Snapshots `dir` and commits it on top of the active revision.
    pub fn commit_dir(&self, dir: &Path) -> Result<CommitOutcome> {
        let snap = snapshot_dir(dir)?;
        revision_tree::commit_snapshot(&self.store, &snap, Some(dir))
    }

    /// Where the active revision's file contents can be read: `worktree` if
    /// given, else the directory it was committed from, else its git commit.
    pub fn content_source(&self, worktree: Option<&Path>) -> Result<Box<dyn ContentSource>> {
        if let Some(dir) = worktree {
            return Ok(Box::new(DirSource::new(dir)));
        }
        let r = self.store.reader()?;
        let active = r.active_revision()?.ok_or(Error::NoActiveRevision)?;
        if let Some(dir) = r.worktree_of(active)? {
            return Ok(Box::new(DirSource::new(dir)));
        }
        let node = revision_tree::node(&r, active)?.ok_or(Error::UnknownRevision(active))?;
        match (node.source_commit, r.meta_string(META_ORIGIN)?) {
            (Some(oid), Some(origin)) => {
                let repo = GitRepo::open(PathBuf::from(origin))?;
                Ok(Box::new(GitSource::new(repo, &Oid(oid))?))
            }
            _ => Err(Error::Other(format!(
                "no content available for revision {active}; pass a worktree"
            ))),
        }
    }

    pub fn search(&self, pattern: &str, limit: usize, worktree: Option<&Path>) -> Result<SearchOutcome> {
        let source = self.content_source(worktree)?;
        search(&self.store.reader()?, source.as_ref(), pattern, limit)
    }

    pub fn symbols(&self, pattern: &str, limit: usize) -> Result<Vec<MatchDetail>> {
        symbol_search(&self.store.reader()?, pattern, limit)
    }

    pub fn stats(&self, top_k: usize) -> Result<IndexStats> {
        let r = self.store.reader()?;
        let mut per_trigram: Vec<(Trigram, u64)> = Vec::new();
        let mut stats = IndexStats {
            revisions: revision_tree::revision_count(&r)?,
            active_revision: r.active_revision()?,
            files: r.live_files()?.len() as u64,
            ..Default::default()
        };
        for (t, _, c) in r.posting_dump(NS_POSTINGS)? {
            stats.total_trigrams += u64::from(c);
            match per_trigram.last_mut() {
                Some((last, n)) if *last == t => *n += u64::from(c),
                _ => per_trigram.push((t, u64::from(c))),
            }
        }
        stats.unique_trigrams = per_trigram.len() as u64;
        per_trigram.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let row = |(t, n): &(Trigram, u64)| TrigramCount {
            trigram: t.to_string(),
            count: *n,
        };
        stats.top_trigrams = per_trigram.iter().take(top_k).map(row).collect();
        stats.top_alphabetic_trigrams = per_trigram
            .iter()
            .filter(|(t, _)| t.is_alphabetic())
            .take(top_k)
            .map(row)
            .collect();

        let symbols = r.live_symbols()?;
        stats.symbols = symbols.len() as u64;
        let names: std::collections::BTreeSet<&str> = symbols.iter().map(|(_, s)| s.name.as_str()).collect();
        stats.unique_symbol_names = names.len() as u64;
        stats.symbol_name_chars = symbols.iter().map(|(_, s)| s.name.chars().count() as u64).sum();
        let hump = r.posting_dump(NS_SYMBOL_POSTINGS)?;
        stats.hump_postings = hump.len() as u64;
        let mut distinct: Vec<Trigram> = hump.into_iter().map(|(t, _, _)| t).collect();
        distinct.dedup();
        stats.hump_unique_trigrams = distinct.len() as u64;
        Ok(stats)
    }

    /// Times `pairs` checkouts between random revision pairs and fits time
    /// against the number of posting changes replayed. The active revision
    /// is restored afterwards.
    pub fn bench_checkout(&self, pairs: usize, seed: u64) -> Result<BenchReport> {
        let count = self.revision_count()?;
        if count < 2 {
            return Err(Error::Other(format!("benchmark needs at least 2 revisions, store has {count}")));
        }
        let original = self.active_revision()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut samples = Vec::with_capacity(pairs);
        for _ in 0..pairs {
            let a = RevisionId(rng.gen_range(0..count));
            let mut b = RevisionId(rng.gen_range(0..count - 1));
            if b >= a {
                b.0 += 1;
            }
            revision_tree::checkout(&self.store, a)?;
            let report = self.checkout(b)?;
            samples.push(BenchSample {
                from: a,
                to: b,
                delta_trigrams: report.stats.path_posting_changes,
                millis: report.elapsed_ms,
            });
        }
        if let Some(rev) = original {
            revision_tree::checkout(&self.store, rev)?;
        }
        let points: Vec<(f64, f64)> = samples
            .iter()
            .map(|s| (s.delta_trigrams as f64, s.millis))
            .collect();
        let (slope, intercept, r2) = linear_fit(&points);
        Ok(BenchReport {
            samples,
            slope_ms_per_trigram: slope,
            intercept_ms: intercept,
            r_squared: r2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_of_exact_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|x| (x as f64, 2.0 * x as f64 + 1.0)).collect();
        let (m, b, r2) = linear_fit(&pts);
        assert!((m - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resolve_ids_and_prefixes() {
        let store = Store::in_memory();
        let mut b = store.begin().unwrap();
        let d = crate::delta::Delta::default();
        revision_tree::add_root(&mut b, &d, Some([0xab; 20])).unwrap();
        revision_tree::add_revision(&mut b, RevisionId(0), &d, Some([0xac; 20])).unwrap();
        store.commit_batch(b).unwrap();
        let r = store.reader().unwrap();
        assert_eq!(resolve_revision(&r, "1").unwrap(), RevisionId(1));
        assert_eq!(resolve_revision(&r, "ABABAB").unwrap(), RevisionId(0));
        assert_eq!(resolve_revision(&r, "acacacac").unwrap(), RevisionId(1));
        assert!(matches!(resolve_revision(&r, "abab"), Err(Error::UnresolvedRevision(_))));
        assert!(matches!(resolve_revision(&r, "7"), Err(Error::UnknownRevision(_))));
        assert!(matches!(resolve_revision(&r, "zzz"), Err(Error::UnresolvedRevision(_))));
    }

    #[test]
    fn commit_search_and_stats_on_worktree() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.rs"), "fn camelHumpSearch() {}\nlet x = 1;\n").unwrap();
        let engine = Engine::in_memory();
        let out = engine.commit_dir(dir.path()).unwrap();
        assert_eq!(out.file_ops, 1);
        let hits = engine.search("Hump", 10, None).unwrap();
        assert_eq!(hits.results[0].occurrences, vec![(1, 9)]);
        let syms = engine.symbols("cHS", 10).unwrap();
        assert_eq!(syms[0].symbol.name, "camelHumpSearch");
        let stats = engine.stats(3).unwrap();
        assert_eq!(stats.files, 1);
        assert_eq!(stats.symbols, 1);
        assert_eq!(stats.top_trigrams.len(), 3);
        assert!(engine.bench_checkout(2, 1).is_ok());
        assert_eq!(engine.active_revision().unwrap(), Some(out.revision));
    }
}
