//! Range tables, bit-capacity arithmetic and payload framing.
//!
//! Bit order is MSB-first everywhere: within payload bytes, within the
//! 32-bit length header, and within each chunk read for a block.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Widths of the default range table.
pub const DEFAULT_WIDTHS: [u16; 6] = [8, 8, 16, 32, 64, 128];

/// Bits in the payload length header.
pub const HEADER_BITS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("range table needs at least one width")]
    Empty,
    #[error("range width {0} is not a power of two")]
    NotPowerOfTwo(u32),
    #[error("range width {0} is too narrow, the minimum is 2")]
    TooNarrow(u32),
    #[error("range widths sum to {0}, expected 256")]
    BadSum(u64),
    #[error("cannot parse width list: {0:?}")]
    Parse(String),
}

/// One quantization range `[lower, upper]` of pixel differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Range {
    lower: u8,
    upper: u8,
    bits: u32,
}

impl Range {
    pub fn lower(self) -> u8 {
        self.lower
    }

    pub fn upper(self) -> u8 {
        self.upper
    }

    pub fn width(self) -> u32 {
        u32::from(self.upper) - u32::from(self.lower) + 1
    }

    /// Bits hidden by a block whose difference falls in this range.
    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn contains(self, d: u8) -> bool {
        (self.lower..=self.upper).contains(&d)
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

/// Ordered partition of `[0, 255]` into power-of-two-wide ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeTable {
    ranges: Vec<Range>,
    by_difference: [u8; 256],
}

impl RangeTable {
    pub fn from_widths(widths: &[u32]) -> Result<Self, TableError> {
        if widths.is_empty() {
            return Err(TableError::Empty);
        }
        for &w in widths {
            if !w.is_power_of_two() {
                return Err(TableError::NotPowerOfTwo(w));
            }
            if w < 2 {
                return Err(TableError::TooNarrow(w));
            }
        }
        let sum: u64 = widths.iter().map(|&w| u64::from(w)).sum();
        if sum != 256 {
            return Err(TableError::BadSum(sum));
        }

        let mut ranges = Vec::with_capacity(widths.len());
        let mut by_difference = [0u8; 256];
        let mut lower = 0u32;
        for (k, &w) in widths.iter().enumerate() {
            let upper = lower + w - 1;
            ranges.push(Range {
                lower: lower as u8,
                upper: upper as u8,
                bits: w.trailing_zeros(),
            });
            by_difference[lower as usize..=upper as usize].fill(k as u8);
            lower += w;
        }
        Ok(Self { ranges, by_difference })
    }

    /// The range containing difference `d`.
    pub fn locate(&self, d: u8) -> Range {
        self.ranges[usize::from(self.by_difference[usize::from(d)])]
    }

    pub fn ranges(&self) -> &[Range] {
        &self.ranges
    }

    pub fn widths(&self) -> Vec<u32> {
        self.ranges.iter().map(|r| r.width()).collect()
    }

    pub fn max_bits(&self) -> u32 {
        self.ranges.iter().map(|r| r.bits).max().unwrap_or(0)
    }
}

impl Default for RangeTable {
    fn default() -> Self {
        let widths = DEFAULT_WIDTHS.map(u32::from);
        Self::from_widths(&widths).expect("default widths are valid")
    }
}

impl FromStr for RangeTable {
    type Err = TableError;

    /// Parses a comma-separated width list such as `8,8,16,32,64,128`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let widths = s
            .split(',')
            .map(|w| w.trim().parse::<u32>().map_err(|_| TableError::Parse(s.to_owned())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_widths(&widths)
    }
}

impl fmt::Display for RangeTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let widths: Vec<String> = self.widths().iter().map(u32::to_string).collect();
        f.write_str(&widths.join(","))
    }
}

/// Sequential reader over a payload bit-stream.
#[derive(Debug, Clone)]
pub struct BitCursor<'a> {
    bits: &'a [bool],
    position: usize,
}

impl<'a> BitCursor<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        Self { bits, position: 0 }
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.position
    }

    pub fn is_exhausted(&self) -> bool {
        self.position == self.bits.len()
    }

    /// Reads `t` bits MSB-first as an integer.
    ///
    /// Returns `None` once the stream is exhausted. A final partial chunk is
    /// padded with zero bits on the right.
    pub fn read_chunk(&mut self, t: u32) -> Option<u32> {
        if self.is_exhausted() {
            return None;
        }
        let take = (t as usize).min(self.remaining());
        let mut value = 0u32;
        for &bit in &self.bits[self.position..self.position + take] {
            value = (value << 1) | u32::from(bit);
        }
        self.position += take;
        Some(value << (t as usize - take))
    }
}

/// A `bits`-wide value carried by one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Chunk {
    pub value: u32,
    pub bits: u32,
}

impl Chunk {
    pub fn new(value: u32, bits: u32) -> Self {
        debug_assert!(bits == 32 || value >> bits == 0);
        Self { value, bits }
    }

    /// Most significant of the `bits` bits.
    pub fn msb(self) -> bool {
        self.bits > 0 && (self.value >> (self.bits - 1)) & 1 == 1
    }

    pub fn to_bits(self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.bits as usize);
        push_bits(&mut out, self.value, self.bits);
        out
    }
}

impl fmt::Display for Chunk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.bits).rev() {
            f.write_str(if (self.value >> i) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Appends the low `t` bits of `value`, MSB-first.
pub fn push_bits(out: &mut Vec<bool>, value: u32, t: u32) {
    out.extend((0..t).rev().map(|i| (value >> i) & 1 == 1));
}

/// Packs MSB-first bits into bytes, zero-filling the last byte.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (7 - i)))
        })
        .collect()
}

pub fn unpack_bits(bytes: &[u8]) -> Vec<bool> {
    let mut bits = Vec::with_capacity(bytes.len() * 8);
    for &byte in bytes {
        push_bits(&mut bits, u32::from(byte), 8);
    }
    bits
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("stream holds {available} bits, too short for the {HEADER_BITS}-bit header")]
    MissingHeader { available: usize },
    #[error("truncated payload: header declares {declared} bits, only {available} available")]
    Truncated { declared: usize, available: usize },
    #[error("header declares {declared} payload bits but the image can hold at most {available}")]
    ExceedsCapacity { declared: usize, available: usize },
}

/// Length header followed by the message bits.
///
/// Panics if the message is 512 MiB or longer, since its bit count would not
/// fit the header.
pub fn frame_payload(message: &[u8]) -> Vec<bool> {
    let bit_len = u32::try_from(message.len() * 8).expect("message bit length must fit in 32 bits");
    let mut bits = Vec::with_capacity(HEADER_BITS + message.len() * 8);
    push_bits(&mut bits, bit_len, HEADER_BITS as u32);
    for &byte in message {
        push_bits(&mut bits, u32::from(byte), 8);
    }
    bits
}

/// Bits a framed message of `len` bytes occupies, before tail padding.
pub fn framed_len(len: usize) -> usize {
    HEADER_BITS + 8 * len
}

/// Reads the bit count stored in the first [`HEADER_BITS`] bits.
pub fn declared_len(bits: &[bool]) -> Result<usize, FrameError> {
    let header = bits
        .get(..HEADER_BITS)
        .ok_or(FrameError::MissingHeader { available: bits.len() })?;
    Ok(header.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b)))
}

/// Inverse of [`frame_payload`]. Bits past the declared length are ignored.
pub fn deframe_payload(bits: &[bool]) -> Result<Vec<u8>, FrameError> {
    let declared = declared_len(bits)?;
    let body = &bits[HEADER_BITS..];
    if declared > body.len() {
        return Err(FrameError::Truncated { declared, available: body.len() });
    }
    Ok(pack_bits(&body[..declared]))
}

/// Accumulates extracted chunks until the framed payload is complete.
#[derive(Debug)]
pub struct FrameCollector {
    bits: Vec<bool>,
    declared: Option<usize>,
    max_bits: usize,
}

impl FrameCollector {
    /// `max_bits` bounds what the carrier could possibly hold, header
    /// included. A header declaring more than that is rejected early.
    pub fn new(max_bits: usize) -> Self {
        Self { bits: Vec::new(), declared: None, max_bits }
    }

    /// Appends one chunk. Returns `Ok(true)` once header and payload are
    /// both complete.
    pub fn push(&mut self, value: u32, t: u32) -> Result<bool, FrameError> {
        push_bits(&mut self.bits, value, t);
        if self.declared.is_none() && self.bits.len() >= HEADER_BITS {
            let declared = declared_len(&self.bits)?;
            let available = self.max_bits.saturating_sub(HEADER_BITS);
            if declared > available {
                return Err(FrameError::ExceedsCapacity { declared, available });
            }
            self.declared = Some(declared);
        }
        Ok(self.is_complete())
    }

    pub fn is_complete(&self) -> bool {
        self.declared.is_some_and(|d| self.bits.len() >= HEADER_BITS + d)
    }

    pub fn finish(self) -> Result<Vec<u8>, FrameError> {
        deframe_payload(&self.bits)
    }
}
