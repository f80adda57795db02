//! Valleys, delimiters, and valley-center alignment.
//!
//! A valley `0^x 1^y` has its center at the last 0 (index `x - 1`). A
//! delimiter is three symmetric valleys, `0^α 1^α 0^β 1^β 0^α 1^α`: the
//! middle one positions the delimiter, the outer two partition it from the
//! neighbouring inner codewords.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitstream::BitString;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValleyError {
    #[error("valley faces must be non-empty, got ({0}, {1})")]
    EmptyFace(usize, usize),
    #[error("alignment scan ran off the {side} end of the received string")]
    AlignOutOfBounds { side: Side },
    #[error("estimate {index} is outside a string of length {len}")]
    EstimateOutOfRange { index: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValleyShape {
    zeros: usize,
    ones: usize,
}

impl ValleyShape {
    pub fn new(zeros: usize, ones: usize) -> Result<Self, ValleyError> {
        if zeros == 0 || ones == 0 {
            return Err(ValleyError::EmptyFace(zeros, ones));
        }
        Ok(ValleyShape { zeros, ones })
    }

    pub fn symmetric(face: usize) -> Result<Self, ValleyError> {
        Self::new(face, face)
    }

    pub fn zeros(&self) -> usize {
        self.zeros
    }

    pub fn ones(&self) -> usize {
        self.ones
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.zeros + self.ones
    }

    pub fn center(&self) -> usize {
        self.zeros - 1
    }

    pub fn render(&self) -> BitString {
        let mut out = BitString::repeat(0, self.zeros);
        out.extend_from(&BitString::repeat(1, self.ones));
        out
    }
}

/// Face lengths of `Delimiter(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelimiterParams {
    pub alpha: usize,
    pub beta: usize,
}

impl DelimiterParams {
    pub fn new(alpha: usize, beta: usize) -> Result<Self, ValleyError> {
        if alpha == 0 || beta == 0 {
            return Err(ValleyError::EmptyFace(alpha, beta));
        }
        Ok(DelimiterParams { alpha, beta })
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        4 * self.alpha + 2 * self.beta
    }

    /// Offset of the positioning valley's center inside the delimiter.
    pub fn positioning_center(&self) -> usize {
        2 * self.alpha + self.beta - 1
    }

    pub fn left_partition_center(&self) -> usize {
        self.alpha - 1
    }

    pub fn right_partition_center(&self) -> usize {
        3 * self.alpha + 2 * self.beta - 1
    }

    pub fn render(&self) -> BitString {
        let outer = ValleyShape { zeros: self.alpha, ones: self.alpha }.render();
        let middle = ValleyShape { zeros: self.beta, ones: self.beta }.render();
        crate::bitstream::concat([&outer, &middle, &outer])
    }
}

pub fn render_valley(v: ValleyShape) -> BitString {
    v.render()
}

pub fn render_delimiter(d: DelimiterParams) -> BitString {
    d.render()
}

/// Result of an alignment scan, with the number of positions visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alignment {
    pub center: usize,
    pub steps: usize,
}

/// Walks downhill from the estimate `j` to the nearest valley center.
///
/// From a 0 the cursor moves right to the first 1 and returns the index
/// before it; from a 1 it moves left to the first 0 and returns that index.
/// A scan that runs off either end of `w` fails, since the valley it was
/// looking for is not there.
pub fn align_valley(w: &BitString, j: usize) -> Result<usize, ValleyError> {
    align_valley_traced(w, j).map(|a| a.center)
}

pub fn align_valley_traced(w: &BitString, j: usize) -> Result<Alignment, ValleyError> {
    let bits = w.bits();
    if j >= bits.len() {
        return Err(ValleyError::EstimateOutOfRange { index: j, len: bits.len() });
    }
    let mut cursor = j;
    let mut steps = 0;
    if bits[j] == 0 {
        loop {
            if bits[cursor] == 1 {
                return Ok(Alignment { center: cursor - 1, steps });
            }
            cursor += 1;
            steps += 1;
            if cursor == bits.len() {
                return Err(ValleyError::AlignOutOfBounds { side: Side::Right });
            }
        }
    } else {
        loop {
            if bits[cursor] == 0 {
                return Ok(Alignment { center: cursor, steps });
            }
            if cursor == 0 {
                return Err(ValleyError::AlignOutOfBounds { side: Side::Left });
            }
            cursor -= 1;
            steps += 1;
        }
    }
}
