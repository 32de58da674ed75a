// SPDX-License-Identifier: Apache-2.0
//! Per-cycle bit slices and multi-cycle temporal streams.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Widest vector supported; one bit per wire packed into a `u64`.
pub const MAX_WIDTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StreamError {
    #[error("width {0} exceeds the supported maximum of {MAX_WIDTH}")]
    TooWide(usize),
    #[error("invalid bit character {0:?} (expected '0' or '1')")]
    BadChar(char),
    #[error("wire {wire} has {len} cycles, expected {expected}")]
    Ragged {
        wire: usize,
        len: usize,
        expected: usize,
    },
    #[error("width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
}

/// One bit per wire. Bit `i` of the packed word is wire `i`.
///
/// Textual form lists wire 0 first, so `"10110100"` has wires 0, 2, 3, 5 set.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVector {
    width: usize,
    bits: u64,
}

#[inline]
pub(crate) fn width_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl BitVector {
    pub fn zeros(width: usize) -> Result<Self, StreamError> {
        Self::from_bits(width, 0)
    }

    /// Build from a packed word; bits above `width` are discarded.
    pub fn from_bits(width: usize, bits: u64) -> Result<Self, StreamError> {
        if width > MAX_WIDTH {
            return Err(StreamError::TooWide(width));
        }
        Ok(BitVector {
            width,
            bits: bits & width_mask(width),
        })
    }

    pub fn from_bools(values: &[bool]) -> Result<Self, StreamError> {
        let bits = values
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
        Self::from_bits(values.len(), bits)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn get(&self, wire: usize) -> bool {
        debug_assert!(wire < self.width);
        (self.bits >> wire) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, wire: usize, value: bool) {
        debug_assert!(wire < self.width);
        if value {
            self.bits |= 1 << wire;
        } else {
            self.bits &= !(1 << wire);
        }
    }

    #[inline]
    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// True when every zero precedes every one (wire 0 to wire n-1).
    pub fn is_sorted(&self) -> bool {
        let ones = self.count_ones() as usize;
        self.bits == width_mask(self.width) & !width_mask(self.width - ones)
    }

    /// Wires `start..start+len` as a new vector.
    pub fn slice(&self, start: usize, len: usize) -> BitVector {
        debug_assert!(start + len <= self.width);
        BitVector {
            width: len,
            bits: (self.bits >> start) & width_mask(len),
        }
    }

    /// Extend to `width` wires, new wires tied to zero.
    pub fn widen(&self, width: usize) -> Result<BitVector, StreamError> {
        if width < self.width {
            return Err(StreamError::WidthMismatch {
                expected: self.width,
                got: width,
            });
        }
        BitVector::from_bits(width, self.bits)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.width).map(move |i| self.get(i))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = StreamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bools = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(StreamError::BadChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        BitVector::from_bools(&bools)
    }
}

/// A bundle of per-wire bit sequences sharing a common cycle count.
///
/// In leading-0 monotone coding a wire's value is its number of ones, i.e.
/// how early its rising edge occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalStream {
    wires: Vec<Vec<bool>>,
    cycles: usize,
}

impl TemporalStream {
    pub fn new(wires: Vec<Vec<bool>>) -> Result<Self, StreamError> {
        if wires.len() > MAX_WIDTH {
            return Err(StreamError::TooWide(wires.len()));
        }
        let cycles = wires.first().map_or(0, Vec::len);
        for (wire, w) in wires.iter().enumerate() {
            if w.len() != cycles {
                return Err(StreamError::Ragged {
                    wire,
                    len: w.len(),
                    expected: cycles,
                });
            }
        }
        Ok(TemporalStream { wires, cycles })
    }

    /// Parse one `0`/`1` string per wire, cycle 0 first.
    pub fn from_wire_strings<S: AsRef<str>>(wires: &[S]) -> Result<Self, StreamError> {
        let parsed = wires
            .iter()
            .map(|s| {
                s.as_ref()
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(StreamError::BadChar(other)),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(parsed)
    }

    /// Monotone leading-0 stream: wire `i` holds `values[i]` trailing ones.
    pub fn from_unary_values(values: &[usize], cycles: usize) -> Result<Self, StreamError> {
        Self::new(
            values
                .iter()
                .map(|&v| (0..cycles).map(|t| t + v.min(cycles) >= cycles).collect())
                .collect(),
        )
    }

    pub fn from_cycles(width: usize, cycles: &[BitVector]) -> Result<Self, StreamError> {
        let mut wires = vec![Vec::with_capacity(cycles.len()); width];
        for slice in cycles {
            if slice.width() != width {
                return Err(StreamError::WidthMismatch {
                    expected: width,
                    got: slice.width(),
                });
            }
            for (i, w) in wires.iter_mut().enumerate() {
                w.push(slice.get(i));
            }
        }
        Self::new(wires)
    }

    pub fn width(&self) -> usize {
        self.wires.len()
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    pub fn wire(&self, i: usize) -> &[bool] {
        &self.wires[i]
    }

    pub fn ones_count(&self, wire: usize) -> usize {
        self.wires[wire].iter().filter(|&&b| b).count()
    }

    /// Slice of every wire at cycle `t`.
    pub fn cycle(&self, t: usize) -> BitVector {
        let bits = self
            .wires
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, w)| acc | ((w[t] as u64) << i));
        BitVector {
            width: self.wires.len(),
            bits,
        }
    }

    pub fn wire_string(&self, i: usize) -> String {
        self.wires[i]
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}
