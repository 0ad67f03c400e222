//! LEB128 varints and zigzag encoding used by the on-disk formats.

pub fn put_u64(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

pub fn put_i64(out: &mut Vec<u8>, v: i64) {
    put_u64(out, zigzag(v));
}

pub fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

pub fn unzigzag(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

/// Cursor over a byte slice; every read returns `None` on truncation.
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn is_empty(&self) -> bool {
        self.remaining() == 0
    }

    pub fn u8(&mut self) -> Option<u8> {
        let b = *self.buf.get(self.pos)?;
        self.pos += 1;
        Some(b)
    }

    pub fn bytes(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.buf.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }

    pub fn array<const N: usize>(&mut self) -> Option<[u8; N]> {
        self.bytes(N)?.try_into().ok()
    }

    pub fn u64(&mut self) -> Option<u64> {
        let mut v: u64 = 0;
        for shift in (0..64).step_by(7) {
            let b = self.u8()?;
            let bits = u64::from(b & 0x7f);
            if shift == 63 && bits > 1 {
                return None;
            }
            v |= bits << shift;
            if b & 0x80 == 0 {
                return Some(v);
            }
        }
        None
    }

    pub fn i64(&mut self) -> Option<i64> {
        self.u64().map(unzigzag)
    }
}

/// Decodes a buffer holding exactly one varint.
pub fn decode_exact_u64(buf: &[u8]) -> Option<u64> {
    let mut r = Reader::new(buf);
    let v = r.u64()?;
    r.is_empty().then_some(v)
}

pub fn encode_u64(v: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(10);
    put_u64(&mut out, v);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_encodings() {
        assert_eq!(encode_u64(0), [0]);
        assert_eq!(encode_u64(127), [0x7f]);
        assert_eq!(encode_u64(300), [0xac, 0x02]);
        assert_eq!(zigzag(-1), 1);
        assert_eq!(zigzag(1), 2);
        assert_eq!(zigzag(i64::MIN), u64::MAX);
    }

    #[test]
    fn rejects_overlong_and_truncated() {
        assert_eq!(decode_exact_u64(&[0x80]), None);
        assert_eq!(decode_exact_u64(&[0xff; 11]), None);
        assert_eq!(decode_exact_u64(&[0x01, 0x00]), None);
    }

    proptest! {
        #[test]
        fn roundtrip(v: u64, s: i64) {
            prop_assert_eq!(decode_exact_u64(&encode_u64(v)), Some(v));
            let mut buf = Vec::new();
            put_i64(&mut buf, s);
            prop_assert_eq!(Reader::new(&buf).i64(), Some(s));
        }
    }
}
