//! Little-endian bit packing shared by every serialized object.
//!
//! Values are appended least-significant bit first; bit `i` of the stream is
//! bit `i % 8` of byte `i / 8`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("unexpected end of input")]
    Truncated,
    #[error("trailing data after the last field")]
    TrailingData,
    #[error("non-zero padding bits")]
    NonZeroPadding,
    #[error("value {value} does not fit the field of order {order}")]
    OutOfRange { value: u32, order: usize },
    #[error("bad magic or identifier")]
    BadHeader,
}

#[derive(Default, Debug, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    /// Appends the low `width` bits of `value`.
    pub fn write(&mut self, value: u32, width: u32) {
        debug_assert!(width <= 32);
        for i in 0..width {
            let bit = ((value >> i) & 1) as u8;
            let pos = self.bit_len;
            if pos.is_multiple_of(8) {
                self.bytes.push(0);
            }
            self.bytes[pos / 8] |= bit << (pos % 8);
            self.bit_len += 1;
        }
    }

    pub fn write_bytes(&mut self, data: &[u8]) {
        if self.bit_len.is_multiple_of(8) {
            self.bytes.extend_from_slice(data);
            self.bit_len += 8 * data.len();
        } else {
            for &b in data {
                self.write(b as u32, 8);
            }
        }
    }

    /// Pads with zero bits to the next byte boundary and returns the bytes.
    pub fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    pub fn bits_remaining(&self) -> usize {
        self.bytes.len() * 8 - self.pos
    }

    pub fn read(&mut self, width: u32) -> Result<u32, CodecError> {
        if self.bits_remaining() < width as usize {
            return Err(CodecError::Truncated);
        }
        let mut v = 0u32;
        for i in 0..width {
            let bit = (self.bytes[self.pos / 8] >> (self.pos % 8)) & 1;
            v |= (bit as u32) << i;
            self.pos += 1;
        }
        Ok(v)
    }

    pub fn read_bytes(&mut self, len: usize) -> Result<Vec<u8>, CodecError> {
        if self.bits_remaining() < 8 * len {
            return Err(CodecError::Truncated);
        }
        if self.pos.is_multiple_of(8) {
            let start = self.pos / 8;
            self.pos += 8 * len;
            return Ok(self.bytes[start..start + len].to_vec());
        }
        (0..len).map(|_| self.read(8).map(|b| b as u8)).collect()
    }

    /// Checks that only zero padding (< 8 bits) remains.
    pub fn finish(self) -> Result<(), CodecError> {
        let rem = self.bits_remaining();
        if rem >= 8 {
            return Err(CodecError::TrailingData);
        }
        if rem > 0 && self.bytes[self.pos / 8] >> (self.pos % 8) != 0 {
            return Err(CodecError::NonZeroPadding);
        }
        Ok(())
    }
}

/// Packs field elements of `width` bits each, padding once at the end.
pub fn pack(values: &[u8], width: u32) -> Vec<u8> {
    let mut w = BitWriter::new();
    for &v in values {
        w.write(v as u32, width);
    }
    w.finish()
}

pub fn unpack(bytes: &[u8], count: usize, width: u32, order: usize) -> Result<Vec<u8>, CodecError> {
    if bytes.len() != (count * width as usize).div_ceil(8) {
        return Err(if bytes.len() * 8 < count * width as usize {
            CodecError::Truncated
        } else {
            CodecError::TrailingData
        });
    }
    let mut r = BitReader::new(bytes);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let v = r.read(width)?;
        if v as usize >= order {
            return Err(CodecError::OutOfRange { value: v, order });
        }
        out.push(v as u8);
    }
    r.finish()?;
    Ok(out)
}
