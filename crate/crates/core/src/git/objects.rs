use std::io::Read;

use flate2::read::ZlibDecoder;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectKind {
    Commit,
    Tree,
    Blob,
    Tag,
}

impl ObjectKind {
    pub(crate) fn from_name(name: &[u8]) -> Option<Self> {
        Some(match name {
            b"commit" => ObjectKind::Commit,
            b"tree" => ObjectKind::Tree,
            b"blob" => ObjectKind::Blob,
            b"tag" => ObjectKind::Tag,
            _ => return None,
        })
    }

    /// Type codes 1-4 of the pack format.
    pub(crate) fn from_pack_code(code: u8) -> Option<Self> {
        Some(match code {
            1 => ObjectKind::Commit,
            2 => ObjectKind::Tree,
            3 => ObjectKind::Blob,
            4 => ObjectKind::Tag,
            _ => return None,
        })
    }
}

/// Inflates a zlib stream. `size_hint` only pre-sizes the buffer.
pub(crate) fn inflate(data: &[u8], size_hint: usize) -> std::io::Result<Vec<u8>> {
    let mut out = Vec::with_capacity(size_hint);
    ZlibDecoder::new(data).read_to_end(&mut out)?;
    Ok(out)
}

/// Splits an inflated loose object into kind and payload.
pub(crate) fn parse_loose(raw: &[u8]) -> Result<(ObjectKind, Vec<u8>), &'static str> {
    let nul = raw.iter().position(|&b| b == 0).ok_or("missing header")?;
    let header = &raw[..nul];
    let space = header.iter().position(|&b| b == b' ').ok_or("bad header")?;
    let kind = ObjectKind::from_name(&header[..space]).ok_or("unknown object type")?;
    let size: usize = std::str::from_utf8(&header[space + 1..])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or("bad object size")?;
    let body = &raw[nul + 1..];
    if body.len() != size {
        return Err("object size mismatch");
    }
    Ok((kind, body.to_vec()))
}
