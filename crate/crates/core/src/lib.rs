//! Versioned code search: a persistent trigram index over git history.

pub mod camelhump;
pub mod delta;
pub mod engine;
pub mod error;
pub mod fulltext_search;
pub mod git;
pub mod git_ingest;
pub mod revision_tree;
pub mod snapshot;
pub mod store;
pub mod text_model;
pub mod varint;

pub use error::{Error, Result};
