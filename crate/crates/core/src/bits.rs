//! MSB-first bit packing.

use crate::error::{Error, Result};

/// A bit sequence packed MSB-first and zero-padded to a whole byte.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bitstream {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl Bitstream {
    /// Wraps stored bytes. The meaningful bit count is unknown until the
    /// stream is parsed, so it is taken to be the full byte length.
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        let bit_len = bytes.len() * 8;
        Bitstream { bytes, bit_len }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Bits written before padding.
    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn byte_len(&self) -> usize {
        self.bytes.len()
    }

    /// Renders the unpadded bits as a `0`/`1` string.
    pub fn to_bit_string(&self) -> String {
        (0..self.bit_len)
            .map(|i| if self.bytes[i / 8] >> (7 - i % 8) & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn put_bit(&mut self, bit: bool) {
        if self.bit_len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> (self.bit_len % 8);
        }
        self.bit_len += 1;
    }

    /// Writes the low `count` bits of `value`, most significant first.
    pub fn put_bits(&mut self, value: u32, count: u32) {
        for shift in (0..count).rev() {
            self.put_bit(value >> shift & 1 == 1);
        }
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn finish(self) -> Bitstream {
        Bitstream {
            bytes: self.bytes,
            bit_len: self.bit_len,
        }
    }
}

#[derive(Debug)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        BitReader { data, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    #[inline]
    pub fn bit(&mut self) -> Result<bool> {
        let byte = self.data.get(self.pos / 8).ok_or(Error::StreamExhausted(self.pos))?;
        let bit = byte >> (7 - self.pos % 8) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn bits(&mut self, count: u32) -> Result<u32> {
        let mut v = 0;
        for _ in 0..count {
            v = v << 1 | self.bit()? as u32;
        }
        Ok(v)
    }

    /// Succeeds when only zero padding up to the end of the current byte
    /// remains.
    pub fn finish(self) -> Result<()> {
        let end = self.pos.div_ceil(8);
        if end != self.data.len() {
            return Err(Error::TrailingData(self.pos));
        }
        let rem = self.pos % 8;
        if rem != 0 && self.data[end - 1] & (0xff >> rem) != 0 {
            return Err(Error::TrailingData(self.pos));
        }
        Ok(())
    }
}
