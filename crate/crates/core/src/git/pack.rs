//! Pack index (v1, v2) and packfile reading with delta resolution.

use std::path::Path;
use std::sync::OnceLock;

use super::objects::{inflate, ObjectKind};
use super::Oid;

type PackResult<T> = std::result::Result<T, String>;

pub(crate) struct PackIndex {
    fanout: [u32; 256],
    oids: Vec<[u8; 20]>,
    offsets: Vec<u64>,
}

fn be32(b: &[u8], at: usize) -> PackResult<u32> {
    b.get(at..at + 4)
        .map(|s| u32::from_be_bytes(s.try_into().expect("4 bytes")))
        .ok_or_else(|| "truncated pack index".to_string())
}

impl PackIndex {
    pub(crate) fn parse(b: &[u8]) -> PackResult<PackIndex> {
        let v2 = b.starts_with(b"\xfftOc");
        let base = if v2 {
            if be32(b, 4)? != 2 {
                return Err("unsupported pack index version".into());
            }
            8
        } else {
            0
        };
        let mut fanout = [0u32; 256];
        for (i, f) in fanout.iter_mut().enumerate() {
            *f = be32(b, base + 4 * i)?;
        }
        let n = fanout[255] as usize;
        let table = base + 1024;
        let mut oids = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        if v2 {
            let sha_at = table;
            let off_at = sha_at + 20 * n + 4 * n;
            let large_at = off_at + 4 * n;
            for i in 0..n {
                let sha = b
                    .get(sha_at + 20 * i..sha_at + 20 * i + 20)
                    .ok_or("truncated pack index")?;
                oids.push(sha.try_into().expect("20 bytes"));
                let off = be32(b, off_at + 4 * i)?;
                let off = if off & 0x8000_0000 != 0 {
                    let j = (off & 0x7fff_ffff) as usize;
                    let s = b
                        .get(large_at + 8 * j..large_at + 8 * j + 8)
                        .ok_or("truncated large offset table")?;
                    u64::from_be_bytes(s.try_into().expect("8 bytes"))
                } else {
                    u64::from(off)
                };
                offsets.push(off);
            }
        } else {
            for i in 0..n {
                let at = table + 24 * i;
                offsets.push(u64::from(be32(b, at)?));
                let sha = b.get(at + 4..at + 24).ok_or("truncated pack index")?;
                oids.push(sha.try_into().expect("20 bytes"));
            }
        }
        Ok(PackIndex {
            fanout,
            oids,
            offsets,
        })
    }

    pub(crate) fn lookup(&self, oid: &Oid) -> Option<u64> {
        let first = oid.0[0] as usize;
        let lo = if first == 0 { 0 } else { self.fanout[first - 1] as usize };
        let hi = self.fanout[first] as usize;
        let slice = self.oids.get(lo..hi)?;
        slice
            .binary_search(&oid.0)
            .ok()
            .map(|i| self.offsets[lo + i])
    }

    pub(crate) fn oids(&self) -> &[[u8; 20]] {
        &self.oids
    }
}

/// Raw entry as stored, before delta resolution.
pub(crate) enum PackEntry {
    Whole(ObjectKind, Vec<u8>),
    OfsDelta { base: u64, delta: Vec<u8> },
    RefDelta { base: Oid, delta: Vec<u8> },
}

pub(crate) struct Pack {
    pub(crate) index: PackIndex,
    path: std::path::PathBuf,
    data: OnceLock<std::result::Result<Vec<u8>, String>>,
}

impl Pack {
    pub(crate) fn open(idx_path: &Path) -> PackResult<Pack> {
        let idx = std::fs::read(idx_path).map_err(|e| format!("{}: {e}", idx_path.display()))?;
        Ok(Pack {
            index: PackIndex::parse(&idx)?,
            path: idx_path.with_extension("pack"),
            data: OnceLock::new(),
        })
    }

    fn data(&self) -> PackResult<&[u8]> {
        self.data
            .get_or_init(|| {
                let d = std::fs::read(&self.path).map_err(|e| format!("{}: {e}", self.path.display()))?;
                if !d.starts_with(b"PACK") {
                    return Err("bad pack signature".into());
                }
                Ok(d)
            })
            .as_deref()
            .map_err(Clone::clone)
    }

    pub(crate) fn entry(&self, offset: u64) -> PackResult<PackEntry> {
        let data = self.data()?;
        let mut pos = usize::try_from(offset).map_err(|_| "offset overflow")?;
        let next = |pos: &mut usize| -> PackResult<u8> {
            let b = *data.get(*pos).ok_or("truncated pack entry")?;
            *pos += 1;
            Ok(b)
        };
        let mut c = next(&mut pos)?;
        let code = (c >> 4) & 7;
        let mut size = u64::from(c & 0x0f);
        let mut shift = 4;
        while c & 0x80 != 0 {
            c = next(&mut pos)?;
            if shift > 57 {
                return Err("pack entry size overflow".into());
            }
            size |= u64::from(c & 0x7f) << shift;
            shift += 7;
        }
        let hint = usize::try_from(size).unwrap_or(0).min(1 << 26);
        match code {
            1..=4 => {
                let kind = ObjectKind::from_pack_code(code).expect("code in range");
                let body = inflate(data.get(pos..).unwrap_or_default(), hint).map_err(|e| e.to_string())?;
                Ok(PackEntry::Whole(kind, body))
            }
            6 => {
                let mut c = next(&mut pos)?;
                let mut rel = u64::from(c & 0x7f);
                while c & 0x80 != 0 {
                    c = next(&mut pos)?;
                    rel = ((rel + 1) << 7) | u64::from(c & 0x7f);
                }
                let base = offset.checked_sub(rel).ok_or("bad delta base offset")?;
                let delta = inflate(data.get(pos..).unwrap_or_default(), hint).map_err(|e| e.to_string())?;
                Ok(PackEntry::OfsDelta { base, delta })
            }
            7 => {
                let base = data.get(pos..pos + 20).ok_or("truncated ref delta")?;
                let base = Oid(base.try_into().expect("20 bytes"));
                let delta = inflate(data.get(pos + 20..).unwrap_or_default(), hint).map_err(|e| e.to_string())?;
                Ok(PackEntry::RefDelta { base, delta })
            }
            _ => Err(format!("unknown pack entry type {code}")),
        }
    }
}

fn delta_varint(d: &[u8], pos: &mut usize) -> PackResult<usize> {
    let mut v = 0usize;
    let mut shift = 0;
    loop {
        let b = *d.get(*pos).ok_or("truncated delta header")?;
        *pos += 1;
        if shift > 56 {
            return Err("delta size overflow".into());
        }
        v |= usize::from(b & 0x7f) << shift;
        shift += 7;
        if b & 0x80 == 0 {
            return Ok(v);
        }
    }
}

/// Applies a git binary delta to `base`.
pub(crate) fn apply_delta(base: &[u8], delta: &[u8]) -> PackResult<Vec<u8>> {
    let mut pos = 0;
    let src_len = delta_varint(delta, &mut pos)?;
    let dst_len = delta_varint(delta, &mut pos)?;
    if src_len != base.len() {
        return Err("delta base size mismatch".into());
    }
    let mut out = Vec::with_capacity(dst_len);
    while pos < delta.len() {
        let op = delta[pos];
        pos += 1;
        if op & 0x80 != 0 {
            let mut field = |mask: u8, shift: u32| -> PackResult<usize> {
                if op & mask == 0 {
                    return Ok(0);
                }
                let b = *delta.get(pos).ok_or("truncated copy op")?;
                pos += 1;
                Ok(usize::from(b) << shift)
            };
            let off = field(0x01, 0)? | field(0x02, 8)? | field(0x04, 16)? | field(0x08, 24)?;
            let mut len = field(0x10, 0)? | field(0x20, 8)? | field(0x40, 16)?;
            if len == 0 {
                len = 0x10000;
            }
            let chunk = base
                .get(off..off.checked_add(len).ok_or("copy overflow")?)
                .ok_or("copy out of range")?;
            out.extend_from_slice(chunk);
        } else if op != 0 {
            let n = usize::from(op);
            let chunk = delta.get(pos..pos + n).ok_or("truncated insert op")?;
            out.extend_from_slice(chunk);
            pos += n;
        } else {
            return Err("reserved delta opcode".into());
        }
    }
    if out.len() != dst_len {
        return Err("delta result size mismatch".into());
    }
    Ok(out)
}
