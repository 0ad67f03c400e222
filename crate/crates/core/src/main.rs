use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use tgix::engine::Engine;
use tgix::Error;

/// Versioned code search over git history.
#[derive(Parser)]
#[command(name = "tgix", version)]
struct Cli {
    /// Index directory.
    #[arg(long, global = true, env = "TGIX_STORE", default_value = ".tgix")]
    store: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest the history of a git branch.
    Index {
        repo: PathBuf,
        #[arg(long, default_value = "HEAD")]
        branch: String,
        #[arg(long)]
        json: bool,
    },
    /// Switch the active revision (revision id or commit-id prefix).
    Checkout {
        revision: String,
        #[arg(long)]
        json: bool,
    },
    /// Record a directory as a new child of the active revision.
    Commit {
        worktree: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Full-text search in the active revision.
    Search {
        pattern: String,
        #[arg(long, default_value_t = 100)]
        limit: usize,
        #[arg(long)]
        json: bool,
        /// Read file contents from this directory.
        #[arg(long)]
        worktree: Option<PathBuf>,
    },
    /// CamelHump symbol search in the active revision.
    Symbol {
        pattern: String,
        #[arg(long, default_value_t = 20)]
        limit: usize,
        #[arg(long)]
        json: bool,
    },
    /// Index statistics.
    Stats {
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long)]
        json: bool,
    },
    /// Time checkouts between random revision pairs.
    BenchCheckout {
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

const EXIT_NO_MATCH: u8 = 1;
const EXIT_FAILURE: u8 = 2;
const EXIT_UNKNOWN_REVISION: u8 = 3;

fn fail(e: &Error) -> ExitCode {
    eprintln!("tgix: {e}");
    match e {
        Error::UnknownRevision(_) | Error::UnresolvedRevision(_) => ExitCode::from(EXIT_UNKNOWN_REVISION),
        _ => ExitCode::from(EXIT_FAILURE),
    }
}

fn json_line(out: &mut impl Write, value: &impl Serialize) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)
}

#[derive(Serialize)]
struct OccurrenceRow<'a> {
    path: &'a str,
    line: u32,
    column: u32,
}

fn open(store: &Path) -> Result<Engine, Error> {
    Engine::open(store)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Index { repo, branch, json } => {
            let engine = open(&cli.store)?;
            let stats = engine.index_git(&repo, &branch)?;
            if json {
                json_line(&mut out, &stats)?;
            } else {
                writeln!(out, "commits:      {}", stats.commits_seen)?;
                writeln!(out, "ingested:     {}", stats.commits_ingested)?;
                writeln!(out, "elapsed:      {:.3} s", stats.elapsed_ms as f64 / 1e3)?;
                writeln!(out, "store bytes:  {}", stats.disk_bytes)?;
            }
        }
        Command::Checkout { revision, json } => {
            let engine = open(&cli.store)?;
            let rev = engine.resolve(&revision)?;
            let report = engine.checkout(rev)?;
            if json {
                json_line(&mut out, &report)?;
            } else {
                writeln!(
                    out,
                    "revision {rev}: {} posting mutations in {:.3} ms",
                    report.stats.posting_mutations, report.elapsed_ms
                )?;
            }
        }
        Command::Commit { worktree, json } => {
            let engine = open(&cli.store)?;
            let outcome = engine.commit_dir(&worktree)?;
            if json {
                json_line(&mut out, &outcome)?;
            } else {
                writeln!(
                    out,
                    "revision {} (parent {}): {} file ops, {} posting changes, {} symbol ops",
                    outcome.revision,
                    outcome.parent,
                    outcome.file_ops,
                    outcome.posting_changes,
                    outcome.symbol_ops
                )?;
            }
        }
        Command::Search {
            pattern,
            limit,
            json,
            worktree,
        } => {
            let engine = open(&cli.store)?;
            let outcome = engine.search(&pattern, limit, worktree.as_deref())?;
            for m in &outcome.results {
                for &(line, column) in &m.occurrences {
                    if json {
                        json_line(
                            &mut out,
                            &OccurrenceRow {
                                path: &m.path,
                                line,
                                column,
                            },
                        )?;
                    } else {
                        writeln!(out, "{}:{line}:{column}", m.path)?;
                    }
                }
            }
            if outcome.truncated {
                eprintln!("tgix: output truncated at {limit} matches");
            }
            if outcome.results.is_empty() {
                return Ok(ExitCode::from(EXIT_NO_MATCH));
            }
        }
        Command::Symbol {
            pattern,
            limit,
            json,
        } => {
            let engine = open(&cli.store)?;
            let matches = engine.symbols(&pattern, limit)?;
            for m in &matches {
                if json {
                    json_line(&mut out, m)?;
                } else {
                    writeln!(
                        out,
                        "{}\t{}:{}\tskipped={} first={} case={} humps={}",
                        m.symbol.name,
                        m.path,
                        m.symbol.line,
                        m.skipped_humps,
                        m.first_letter_match,
                        m.case_matches,
                        m.total_humps
                    )?;
                }
            }
            if matches.is_empty() {
                return Ok(ExitCode::from(EXIT_NO_MATCH));
            }
        }
        Command::Stats { top, json } => {
            let engine = open(&cli.store)?;
            let s = engine.stats(top)?;
            if json {
                json_line(&mut out, &s)?;
            } else {
                let active = s.active_revision.map_or("none".to_string(), |r| r.to_string());
                writeln!(out, "revisions:              {}", s.revisions)?;
                writeln!(out, "active revision:        {active}")?;
                writeln!(out, "files:                  {}", s.files)?;
                writeln!(out, "unique trigrams:        {}", s.unique_trigrams)?;
                writeln!(out, "total trigrams:         {}", s.total_trigrams)?;
                writeln!(out, "symbols:                {}", s.symbols)?;
                writeln!(out, "unique symbol names:    {}", s.unique_symbol_names)?;
                writeln!(out, "symbol name chars:      {}", s.symbol_name_chars)?;
                writeln!(out, "camelhump trigrams:     {}", s.hump_unique_trigrams)?;
                writeln!(out, "camelhump postings:     {}", s.hump_postings)?;
                writeln!(out, "top trigrams:")?;
                for t in &s.top_trigrams {
                    writeln!(out, "  {:?}\t{}", t.trigram, t.count)?;
                }
                writeln!(out, "top alphabetic trigrams:")?;
                for t in &s.top_alphabetic_trigrams {
                    writeln!(out, "  {:?}\t{}", t.trigram, t.count)?;
                }
            }
        }
        Command::BenchCheckout { pairs, seed } => {
            let engine = open(&cli.store)?;
            let count = engine.revision_count()?;
            if count < 2 {
                eprintln!("tgix: benchmark needs at least 2 revisions, store has {count}");
                return Ok(ExitCode::from(EXIT_FAILURE));
            }
            let report = engine.bench_checkout(pairs, seed)?;
            out.write_all(report.to_csv().as_bytes())?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
