//! Bit strings and their on-disk formats.
//!
//! Indexing is 0-based everywhere in this crate. The binary format is an
//! 8-byte little-endian bit count followed by the bits packed LSB-first,
//! zero-padded to a whole byte. The ascii format is one `'0'`/`'1'`
//! character per bit with no header.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const HEADER_LEN: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("truncated header: expected {HEADER_LEN} bytes, found {0}")]
    TruncatedHeader(usize),
    #[error("truncated payload: header announces {bits} bits ({needed} bytes), found {found} bytes")]
    TruncatedPayload { bits: u64, needed: usize, found: usize },
    #[error("invalid character {found:?} at offset {offset}")]
    InvalidChar { offset: usize, found: char },
}

/// On-disk encoding of a [`BitString`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Binary,
    Ascii,
}

impl Format {
    /// `.txt` and `.ascii` files are ascii; everything else is binary.
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("txt") | Some("ascii") => Format::Ascii,
            _ => Format::Binary,
        }
    }
}

/// A finite sequence of bits. Every stored byte is 0 or 1.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        BitString { bits: Vec::with_capacity(n) }
    }

    /// `bit` copies of `value`.
    pub fn repeat(value: u8, count: usize) -> Self {
        BitString { bits: vec![value & 1; count] }
    }

    /// Builds from arbitrary bytes; any nonzero byte becomes a 1 bit.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        BitString { bits: bits.into_iter().map(|b| u8::from(b != 0)).collect() }
    }

    /// The low `len` bits of `value`, least significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        BitString { bits: (0..len).map(|i| ((value >> i) & 1) as u8).collect() }
    }

    /// Inverse of [`BitString::from_u64`]; panics above 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len() <= 64, "bit string too long for u64");
        self.bits.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.bits.get(i).copied()
    }

    pub fn push(&mut self, bit: u8) {
        self.bits.push(bit & 1);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    /// Copy of `self[start..end]`, with both ends clamped to the string.
    pub fn slice(&self, start: usize, end: usize) -> BitString {
        let end = end.min(self.len());
        let start = start.min(end);
        BitString { bits: self.bits[start..end].to_vec() }
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    pub fn serialize(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Ascii => self.bits.iter().map(|&b| b'0' + b).collect(),
            Format::Binary => {
                let mut out = Vec::with_capacity(HEADER_LEN + self.len().div_ceil(8));
                out.extend_from_slice(&(self.len() as u64).to_le_bytes());
                for chunk in self.bits.chunks(8) {
                    let byte = chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b << i));
                    out.push(byte);
                }
                out
            }
        }
    }

    /// Parses either format. Ascii input tolerates trailing whitespace
    /// (a final newline written by an editor) but nothing else.
    pub fn deserialize(bytes: &[u8], format: Format) -> Result<BitString, ParseError> {
        match format {
            Format::Ascii => {
                let trimmed = trim_trailing_whitespace(bytes);
                let bits = trimmed
                    .iter()
                    .enumerate()
                    .map(|(offset, &c)| match c {
                        b'0' => Ok(0),
                        b'1' => Ok(1),
                        other => Err(ParseError::InvalidChar { offset, found: other as char }),
                    })
                    .collect::<Result<Vec<u8>, _>>()?;
                Ok(BitString { bits })
            }
            Format::Binary => {
                if bytes.len() < HEADER_LEN {
                    return Err(ParseError::TruncatedHeader(bytes.len()));
                }
                let mut header = [0u8; HEADER_LEN];
                header.copy_from_slice(&bytes[..HEADER_LEN]);
                let nbits = u64::from_le_bytes(header);
                let payload = &bytes[HEADER_LEN..];
                let needed = usize::try_from(nbits.div_ceil(8)).unwrap_or(usize::MAX);
                if payload.len() < needed {
                    return Err(ParseError::TruncatedPayload {
                        bits: nbits,
                        needed,
                        found: payload.len(),
                    });
                }
                let nbits = nbits as usize;
                let bits = (0..nbits).map(|i| (payload[i / 8] >> (i % 8)) & 1).collect();
                Ok(BitString { bits })
            }
        }
    }
}

fn trim_trailing_whitespace(bytes: &[u8]) -> &[u8] {
    let end = bytes.iter().rposition(|b| !b.is_ascii_whitespace()).map_or(0, |i| i + 1);
    &bytes[..end]
}

/// In-order concatenation of `parts`.
pub fn concat<'a, I>(parts: I) -> BitString
where
    I: IntoIterator<Item = &'a BitString>,
{
    let mut out = BitString::new();
    for part in parts {
        out.extend_from(part);
    }
    out
}

impl std::ops::Index<usize> for BitString {
    type Output = u8;

    fn index(&self, i: usize) -> &u8 {
        &self.bits[i]
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

impl FromStr for BitString {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BitString::deserialize(s.as_bytes(), Format::Ascii)
    }
}

impl FromIterator<u8> for BitString {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        BitString::from_bits(iter)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Test helper: parse an ascii literal, panicking on bad input.
pub fn bits(s: &str) -> BitString {
    s.parse().expect("invalid bit literal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn concat_examples() {
        assert_eq!(concat(&[bits("01"), bits("1")]), bits("011"));
        assert_eq!(concat(&Vec::<BitString>::new()), BitString::new());
        assert_eq!(
            concat(&[BitString::repeat(0, 4), BitString::repeat(1, 4)]),
            bits("00001111")
        );
    }

    #[test]
    fn binary_layout() {
        assert_eq!(bits("1").serialize(Format::Binary), vec![1, 0, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(BitString::new().serialize(Format::Binary), vec![0; 8]);
        // bit 0 is the least significant bit of the first payload byte
        let w = bits("101100001");
        assert_eq!(w.serialize(Format::Binary), vec![9, 0, 0, 0, 0, 0, 0, 0, 0b0000_1101, 0b1]);
    }

    #[test]
    fn ascii_layout() {
        assert_eq!(bits("0110").serialize(Format::Ascii), b"0110".to_vec());
        assert_eq!(BitString::deserialize(b"0110\n", Format::Ascii).unwrap(), bits("0110"));
    }

    #[test]
    fn rejects_malformed_input() {
        assert_eq!(
            BitString::deserialize(&[1, 0, 0], Format::Binary),
            Err(ParseError::TruncatedHeader(3))
        );
        assert!(matches!(
            BitString::deserialize(&[9, 0, 0, 0, 0, 0, 0, 0, 1], Format::Binary),
            Err(ParseError::TruncatedPayload { bits: 9, needed: 2, found: 1 })
        ));
        assert_eq!(
            BitString::deserialize(b"01x1", Format::Ascii),
            Err(ParseError::InvalidChar { offset: 2, found: 'x' })
        );
    }

    #[test]
    fn large_round_trip() {
        let w: BitString = (0..1_000_000u64).map(|i| ((i * 7919) % 3 == 0) as u8).collect();
        for format in [Format::Binary, Format::Ascii] {
            assert_eq!(BitString::deserialize(&w.serialize(format), format).unwrap(), w);
        }
        assert_eq!(w.serialize(Format::Binary).len(), 8 + 125_000);
    }

    #[test]
    fn u64_conversion() {
        assert_eq!(BitString::from_u64(0b1101, 4), bits("1011"));
        assert_eq!(bits("1011").to_u64(), 0b1101);
    }

    proptest! {
        #[test]
        fn round_trip_both_formats(v in proptest::collection::vec(0u8..2, 0..2048)) {
            let w = BitString::from_bits(v);
            for format in [Format::Binary, Format::Ascii] {
                prop_assert_eq!(BitString::deserialize(&w.serialize(format), format).unwrap(), w.clone());
            }
            prop_assert_eq!(w.serialize(Format::Binary).len(), 8 + w.len().div_ceil(8));
        }
    }
}
