use std::path::PathBuf;

use crate::revision_tree::RevisionId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("storage backend error: {0}")]
    Backend(String),

    #[error("corrupt store: {0}")]
    CorruptStore(String),

    /// A delta did not fit the state it was applied to (posting underflow,
    /// adding a file that is already present, ...). The batch is discarded.
    #[error("corrupt or mis-sequenced delta: {0}")]
    CorruptDelta(String),

    #[error("malformed delta encoding: {0}")]
    DeltaFormat(&'static str),

    #[error("unknown revision {0}")]
    UnknownRevision(RevisionId),

    #[error("cannot resolve revision `{0}`")]
    UnresolvedRevision(String),

    #[error("no active revision; check out a revision first")]
    NoActiveRevision,

    #[error("not a git repository: {}", .0.display())]
    NotARepository(PathBuf),

    #[error("branch `{0}` not found")]
    MissingBranch(String),

    #[error("git object {0} not found")]
    MissingObject(String),

    #[error("corrupt git object {oid}: {reason}")]
    CorruptObject { oid: String, reason: String },

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("{0}")]
    Other(String),
}

impl From<redb::Error> for Error {
    fn from(e: redb::Error) -> Self {
        Error::Backend(e.to_string())
    }
}

macro_rules! redb_into {
    ($($t:ty),*) => {
        $(impl From<$t> for Error {
            fn from(e: $t) -> Self {
                Error::Backend(e.to_string())
            }
        })*
    };
}

redb_into!(
    redb::DatabaseError,
    redb::TransactionError,
    redb::TableError,
    redb::StorageError,
    redb::CommitError
);
