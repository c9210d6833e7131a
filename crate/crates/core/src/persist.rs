//! Binary index serialization: little-endian primitives behind a tagged header.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::object::{IdType, LabelType, ObjectRecord};

const MAGIC: &[u8; 4] = b"SSIX";

/// Appends little-endian values to a byte buffer.
#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    /// Starts a buffer with the magic, method name and format version.
    pub fn new(method: &str, version: u32) -> Self {
        let mut w = Writer { buf: Vec::new() };
        w.buf.extend_from_slice(MAGIC);
        w.str(method);
        w.u32(version);
        w
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }

    pub fn i32(&mut self, v: i32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn bytes(&mut self, v: &[u8]) {
        self.usize(v.len());
        self.buf.extend_from_slice(v);
    }

    pub fn str(&mut self, v: &str) {
        self.bytes(v.as_bytes());
    }

    pub fn u32s(&mut self, v: &[u32]) {
        self.usize(v.len());
        for &x in v {
            self.u32(x);
        }
    }

    pub fn f64s(&mut self, v: &[f64]) {
        self.usize(v.len());
        for &x in v {
            self.f64(x);
        }
    }

    pub fn record(&mut self, r: &ObjectRecord) {
        self.u32(r.id());
        self.i32(r.label());
        self.bytes(r.bytes());
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

/// Reads values written by [`Writer`]; every short read is a format error.
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Checks magic, method name and version.
    pub fn open(buf: &'a [u8], method: &str, version: u32) -> Result<Self> {
        let mut r = Reader { buf, pos: 0 };
        let (m, v) = r.header()?;
        if m != method {
            return Err(Error::Format(alloc::format!("index was saved by '{m}', not '{method}'")));
        }
        if v != version {
            return Err(Error::Format(alloc::format!("unsupported '{method}' format version {v}")));
        }
        Ok(r)
    }

    fn header(&mut self) -> Result<(String, u32)> {
        if self.take(4)? != MAGIC {
            return Err(Error::Format("not an index file".into()));
        }
        let m = self.string()?;
        let v = self.u32()?;
        Ok((m, v))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(e) => {
                let s = &self.buf[self.pos..e];
                self.pos = e;
                Ok(s)
            }
            None => Err(Error::Format("unexpected end of index data".into())),
        }
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    pub fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format("length overflow".into()))
    }

    /// A length that must fit in the remaining bytes at `elem` bytes per item.
    pub fn len(&mut self, elem: usize) -> Result<usize> {
        let n = self.usize()?;
        if n.saturating_mul(elem) > self.buf.len() - self.pos {
            return Err(Error::Format("unexpected end of index data".into()));
        }
        Ok(n)
    }

    pub fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.array()?))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.len(1)?;
        self.take(n)
    }

    pub fn string(&mut self) -> Result<String> {
        let b = self.bytes()?;
        core::str::from_utf8(b)
            .map(String::from)
            .map_err(|_| Error::Format("invalid UTF-8 in index data".into()))
    }

    pub fn u32s(&mut self) -> Result<Vec<u32>> {
        let n = self.len(4)?;
        (0..n).map(|_| self.u32()).collect()
    }

    pub fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len(8)?;
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn record(&mut self) -> Result<ObjectRecord> {
        let id: IdType = self.u32()?;
        let label: LabelType = self.i32()?;
        let b = self.bytes()?;
        Ok(ObjectRecord::new(id, label, b))
    }

    /// Fails unless every byte was consumed.
    pub fn finish(self) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(Error::Format("trailing bytes after index data".into()))
        }
    }
}

/// Method name stored in a saved index, without validating the rest.
pub fn peek_method(buf: &[u8]) -> Result<String> {
    let mut r = Reader { buf, pos: 0 };
    Ok(r.header()?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut w = Writer::new("m", 3);
        w.u32(7);
        w.f64(-1.5);
        w.u32s(&[1, 2, 3]);
        w.record(&ObjectRecord::new(4, 2, b"abc"));
        let buf = w.finish();
        assert_eq!(peek_method(&buf).unwrap(), "m");
        let mut r = Reader::open(&buf, "m", 3).unwrap();
        assert_eq!(r.u32().unwrap(), 7);
        assert_eq!(r.f64().unwrap(), -1.5);
        assert_eq!(r.u32s().unwrap(), [1, 2, 3]);
        let rec = r.record().unwrap();
        assert_eq!((rec.id(), rec.label(), rec.bytes()), (4, 2, &b"abc"[..]));
        r.finish().unwrap();

        assert!(matches!(Reader::open(&buf, "other", 3), Err(Error::Format(_))));
        assert!(matches!(Reader::open(&buf, "m", 4), Err(Error::Format(_))));
        for cut in 0..buf.len() {
            let res = Reader::open(&buf[..cut], "m", 3).and_then(|mut r| {
                r.u32()?;
                r.f64()?;
                r.u32s()?;
                r.record()?;
                r.finish()
            });
            assert!(matches!(res, Err(Error::Format(_))), "cut at {cut}");
        }
    }
}
