//! Key layout. Every key starts with a one-byte namespace tag.
//!
//! ```text
//! P ‖ trigram(12) ‖ file_id(8 BE)          -> varint count   full-text postings
//! S ‖ trigram(12) ‖ symbol_id(8 BE)        -> varint count   CamelHump postings
//! F p ‖ path                               -> file_id(8 BE)  path registry
//! F i ‖ file_id                            -> path
//! F a ‖ file_id                            -> ()             file present in active revision
//! F b ‖ file_id ‖ trigram                  -> varint count   per-file bag (file-major mirror of P)
//! F s ‖ file_id ‖ symbol_id                -> ()             live symbols of a file
//! F k ‖ symbol record                      -> symbol_id      symbol registry
//! F r ‖ symbol_id                          -> symbol record
//! F l ‖ symbol_id                          -> ()             symbol live in active revision
//! R ‖ revision_id(8 BE)                    -> node header ‖ delta
//! M h                                      -> "TGIX" ‖ u32 LE format version
//! M a                                      -> revision_id    active revision
//! M n {f,s,r}                              -> u64            next file / symbol / revision id
//! M c ‖ oid(20)                            -> revision_id    source commit index
//! M w ‖ revision_id                        -> path           worktree of a synthetic revision
//! M o / M g                                -> origin repository path / branch
//! ```

use crate::text_model::{Trigram, TRIGRAM_BYTES};

pub const NS_POSTINGS: u8 = b'P';
pub const NS_SYMBOL_POSTINGS: u8 = b'S';
pub const NS_FILES: u8 = b'F';
pub const NS_REVISIONS: u8 = b'R';
pub const NS_META: u8 = b'M';

pub const META_HEADER: &[u8] = b"Mh";
pub const META_ACTIVE: &[u8] = b"Ma";
pub const META_NEXT_FILE: &[u8] = b"Mnf";
pub const META_NEXT_SYMBOL: &[u8] = b"Mns";
pub const META_NEXT_REVISION: &[u8] = b"Mnr";
pub const META_ORIGIN: &[u8] = b"Mo";
pub const META_BRANCH: &[u8] = b"Mg";
pub const META_COMMIT_PREFIX: &[u8] = b"Mc";
pub const META_WORKTREE_PREFIX: &[u8] = b"Mw";

pub const FILE_PATH_PREFIX: &[u8] = b"Fp";
pub const FILE_ID_PREFIX: &[u8] = b"Fi";
pub const FILE_LIVE_PREFIX: &[u8] = b"Fa";
pub const FILE_BAG_PREFIX: &[u8] = b"Fb";
pub const FILE_SYMBOLS_PREFIX: &[u8] = b"Fs";
pub const SYMBOL_KEY_PREFIX: &[u8] = b"Fk";
pub const SYMBOL_RECORD_PREFIX: &[u8] = b"Fr";
pub const SYMBOL_LIVE_PREFIX: &[u8] = b"Fl";

/// Posting keys are tag ‖ trigram ‖ id.
pub const POSTING_KEY_LEN: usize = 1 + TRIGRAM_BYTES + 8;

fn with_prefix(prefix: &[u8], tail_len: usize) -> Vec<u8> {
    let mut k = Vec::with_capacity(prefix.len() + tail_len);
    k.extend_from_slice(prefix);
    k
}

pub fn posting_key(ns: u8, t: &Trigram, id: u64) -> Vec<u8> {
    let mut k = Vec::with_capacity(POSTING_KEY_LEN);
    k.push(ns);
    k.extend_from_slice(&t.to_bytes());
    k.extend_from_slice(&id.to_be_bytes());
    k
}

pub fn posting_prefix(ns: u8, t: &Trigram) -> Vec<u8> {
    let mut k = Vec::with_capacity(1 + TRIGRAM_BYTES);
    k.push(ns);
    k.extend_from_slice(&t.to_bytes());
    k
}

/// Splits a posting key into trigram and id.
pub fn parse_posting_key(key: &[u8]) -> Option<(Trigram, u64)> {
    if key.len() != POSTING_KEY_LEN {
        return None;
    }
    let t = Trigram::from_bytes(&key[1..1 + TRIGRAM_BYTES])?;
    let id = u64::from_be_bytes(key[1 + TRIGRAM_BYTES..].try_into().ok()?);
    Some((t, id))
}

pub fn id_key(prefix: &[u8], id: u64) -> Vec<u8> {
    let mut k = with_prefix(prefix, 8);
    k.extend_from_slice(&id.to_be_bytes());
    k
}

pub fn bytes_key(prefix: &[u8], tail: &[u8]) -> Vec<u8> {
    let mut k = with_prefix(prefix, tail.len());
    k.extend_from_slice(tail);
    k
}

pub fn file_bag_key(file: u64, t: &Trigram) -> Vec<u8> {
    let mut k = id_key(FILE_BAG_PREFIX, file);
    k.extend_from_slice(&t.to_bytes());
    k
}

pub fn file_symbol_key(file: u64, symbol: u64) -> Vec<u8> {
    let mut k = id_key(FILE_SYMBOLS_PREFIX, file);
    k.extend_from_slice(&symbol.to_be_bytes());
    k
}

pub fn revision_key(id: u64) -> Vec<u8> {
    let mut k = Vec::with_capacity(9);
    k.push(NS_REVISIONS);
    k.extend_from_slice(&id.to_be_bytes());
    k
}

/// Reads a trailing big-endian u64 (the last 8 bytes of a key or value).
pub fn trailing_u64(bytes: &[u8]) -> Option<u64> {
    let start = bytes.len().checked_sub(8)?;
    Some(u64::from_be_bytes(bytes[start..].try_into().ok()?))
}
