//! Little-endian helpers shared by the binary model and vector formats.

use crate::error::{Error, Result};

pub(crate) struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub(crate) fn with_magic(magic: &[u8]) -> Self {
        ByteWriter { buf: magic.to_vec() }
    }

    pub(crate) fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn f64s(&mut self, vs: &[f64]) {
        for &v in vs {
            self.f64(v);
        }
    }

    pub(crate) fn into_inner(self) -> Vec<u8> {
        self.buf
    }
}

/// Bounds-checked cursor. Lengths read from the input are validated against
/// the remaining bytes before anything is allocated.
pub(crate) struct ByteReader<'a> {
    format: &'static str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub(crate) fn new(format: &'static str, bytes: &'a [u8]) -> Self {
        ByteReader { format, bytes, pos: 0 }
    }

    pub(crate) fn error(&self, message: &str) -> Error {
        Error::format(self.format, format!("{message} (at byte {})", self.pos))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.error("unexpected end of data"));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub(crate) fn magic(&mut self, magic: &[u8]) -> Result<()> {
        if self.take(magic.len())? != magic {
            return Err(Error::format(self.format, "bad magic"));
        }
        Ok(())
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A u64 length that must fit in `usize`.
    pub(crate) fn len_u64(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| self.error("length does not fit in memory"))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Fails unless `count` items of `item_size` bytes can still be read.
    pub(crate) fn ensure_items(&self, count: usize, item_size: usize) -> Result<()> {
        let needed = count
            .checked_mul(item_size)
            .ok_or_else(|| self.error("declared size overflows"))?;
        if needed > self.bytes.len() - self.pos {
            return Err(self.error("declared size exceeds remaining data"));
        }
        Ok(())
    }

    pub(crate) fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        self.ensure_items(count, 8)?;
        (0..count).map(|_| self.f64()).collect()
    }

    pub(crate) fn finish(self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.error("trailing bytes"));
        }
        Ok(())
    }
}
