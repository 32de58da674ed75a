// SPDX-License-Identifier: Apache-2.0
//! Top-k pruning of sorting networks.
//!
//! The bottom `k` wires of a sorter carry, at every cycle, `min(popcount, k)`
//! ones. Only units on a backward path from those wires matter; they are the
//! *mandatory* units. A mandatory unit one of whose outputs is never read
//! again is a *half* unit, and the gate driving that dead output (AND for the
//! `i` side, OR for the `j` side) can be dropped.
//!
//! Selector file format extends the network format:
//!
//! ```text
//! # top-k selector
//! n 8
//! k 2
//! total 19
//! 0 2
//! 1 3 H:1
//! ```
//!
//! `total` is the unit count of the source sorter; `H:<wire>` marks the dead
//! output of a half unit.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::bits::{BitVector, StreamError, TemporalStream};
use crate::sortnet::{
    content_lines, parse_header, parse_unit, validate_sorter, CompareSwap, NetworkError, Origin,
    SortingNetwork, ValidationBudget,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectorError {
    #[error("k = {k} out of range 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("half unit at position {position} is invalid: {msg}")]
    BadHalf { position: usize, msg: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// A mandatory unit whose output on `dead_wire` is never read downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HalfUnit {
    /// Index into [`TopKSelector::mandatory`].
    pub position: usize,
    pub dead_wire: usize,
}

/// The gate kept or removed on one side of a compare-and-swap unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gate {
    And,
    Or,
}

/// Unit counts in total / mandatory / half order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SelectorCounts {
    pub total: usize,
    pub mandatory: usize,
    pub half: usize,
}

impl fmt::Display for SelectorCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.total, self.mandatory, self.half)
    }
}

/// Value forced onto dead wires during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeadWire {
    Zero,
    One,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopKSelector {
    n: usize,
    k: usize,
    source_total: usize,
    mandatory: Vec<CompareSwap>,
    half: Vec<HalfUnit>,
    warnings: Vec<String>,
}

/// Prune `net` down to the units that feed its bottom `k` wires.
///
/// Backward pass: the live set starts as the `k` output wires; scanning units
/// right to left, a unit touching a live wire is kept and makes its other wire
/// live. Forward pass: the kept units are followed by `k - 1` consumer pairs
/// `(n-k, n-k+1) .. (n-2, n-1)`; a kept unit is half on wire `x` when no later
/// entry of that extended list references `x`. With `k = 1` there are no
/// consumer pairs and wire `n - 1` counts as consumed.
pub fn prune_topk(net: &SortingNetwork, k: usize) -> Result<TopKSelector, SelectorError> {
    let n = net.width();
    if k == 0 || k > n {
        return Err(SelectorError::BadK { k, n });
    }

    let mut warnings = Vec::new();
    if net.origin() == Origin::LoadedCustom {
        let report = validate_sorter(net, ValidationBudget::default());
        if !report.passed {
            warnings.push(format!("source network is not a sorter: {report}"));
        }
    }

    let mut live = vec![false; n];
    live[n - k..].iter_mut().for_each(|w| *w = true);
    let mut mandatory: Vec<CompareSwap> = net
        .units()
        .iter()
        .rev()
        .filter(|u| {
            let keep = live[u.i] || live[u.j];
            if keep {
                live[u.i] = true;
                live[u.j] = true;
            }
            keep
        })
        .copied()
        .collect();
    mandatory.reverse();

    // "referenced later in the extended list", computed in one backward scan.
    // The consumer pairs reference every output wire; with k = 1 the lone
    // output is treated as consumed.
    let mut read_later = vec![false; n];
    read_later[n - k..].iter_mut().for_each(|w| *w = true);
    let mut half = Vec::new();
    for (position, u) in mandatory.iter().enumerate().rev() {
        for wire in [u.i, u.j] {
            if !read_later[wire] {
                half.push(HalfUnit {
                    position,
                    dead_wire: wire,
                });
            }
        }
        read_later[u.i] = true;
        read_later[u.j] = true;
    }
    half.sort();

    let sel = TopKSelector {
        n,
        k,
        source_total: net.len(),
        mandatory,
        half,
        warnings,
    };
    sel.check_structure()?;
    Ok(sel)
}

impl TopKSelector {
    pub fn width(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mandatory(&self) -> &[CompareSwap] {
        &self.mandatory
    }

    pub fn half_units(&self) -> &[HalfUnit] {
        &self.half
    }

    /// Provenance notes, e.g. a source network that failed validation.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn output_wires(&self) -> std::ops::Range<usize> {
        self.n - self.k..self.n
    }

    pub fn counts(&self) -> SelectorCounts {
        selector_counts(self)
    }

    /// Gate removed by a half unit: the one driving the dead output.
    pub fn removed_gate(&self, h: &HalfUnit) -> Gate {
        if self.mandatory[h.position].i == h.dead_wire {
            Gate::And
        } else {
            Gate::Or
        }
    }

    /// Dead wire of the unit at `position`, if it is a half unit.
    pub fn dead_wire_at(&self, position: usize) -> Option<usize> {
        self.half
            .binary_search_by(|h| h.position.cmp(&position))
            .ok()
            .map(|idx| self.half[idx].dead_wire)
    }

    /// Every half entry names one wire of a mandatory unit, no unit has both
    /// outputs dead, and a dead wire is neither an output nor read again.
    fn check_structure(&self) -> Result<(), SelectorError> {
        let mut seen = BTreeSet::new();
        for h in &self.half {
            let bad = |msg: &str| SelectorError::BadHalf {
                position: h.position,
                msg: msg.into(),
            };
            let unit = self
                .mandatory
                .get(h.position)
                .ok_or_else(|| bad("no such mandatory unit"))?;
            if !unit.touches(h.dead_wire) {
                return Err(bad("dead wire is not one of the unit's wires"));
            }
            if !seen.insert(h.position) {
                return Err(bad("both outputs dead"));
            }
            if self.output_wires().contains(&h.dead_wire) {
                return Err(bad("dead wire is a selector output"));
            }
            if self.mandatory[h.position + 1..]
                .iter()
                .any(|u| u.touches(h.dead_wire))
            {
                return Err(bad("dead wire is read downstream"));
            }
        }
        Ok(())
    }

    fn eval_packed(&self, mut bits: u64, dead: DeadWire) -> u64 {
        let mut halves = self.half.iter().peekable();
        for (p, u) in self.mandatory.iter().enumerate() {
            bits = u.apply(bits);
            while let Some(h) = halves.next_if(|h| h.position == p) {
                match dead {
                    DeadWire::Zero => bits &= !(1 << h.dead_wire),
                    DeadWire::One => bits |= 1 << h.dead_wire,
                }
            }
        }
        bits >> (self.n - self.k)
    }

    /// Like [`eval_topk`] with dead wires forced to the given constant.
    pub fn eval_with_dead(
        &self,
        input: &BitVector,
        dead: DeadWire,
    ) -> Result<BitVector, SelectorError> {
        if input.width() != self.n {
            return Err(StreamError::WidthMismatch {
                expected: self.n,
                got: input.width(),
            }
            .into());
        }
        Ok(BitVector::from_bits(
            self.k,
            self.eval_packed(input.bits(), dead),
        )?)
    }

    pub fn to_text(&self) -> String {
        let c = self.counts();
        let mut out = format!(
            "# top-k selector: {} wires, k = {}, total/mandatory/half = {c}\nn {}\nk {}\ntotal {}\n",
            self.n, self.k, self.n, self.k, self.source_total
        );
        for (p, u) in self.mandatory.iter().enumerate() {
            match self.dead_wire_at(p) {
                Some(w) => out.push_str(&format!("{} {} H:{w}\n", u.i, u.j)),
                None => out.push_str(&format!("{} {}\n", u.i, u.j)),
            }
        }
        out
    }

    pub fn counts_json(&self) -> String {
        serde_json::to_string(&self.counts()).expect("plain struct serializes")
    }
}

/// Bottom `k` wires of the pruned evaluation; wire `n-k` is bit 0 of the result.
pub fn eval_topk(sel: &TopKSelector, input: &BitVector) -> Result<BitVector, SelectorError> {
    sel.eval_with_dead(input, DeadWire::Zero)
}

/// Cycle-wise [`eval_topk`] over a temporal stream; returns `k` wires.
pub fn eval_topk_temporal(
    sel: &TopKSelector,
    input: &TemporalStream,
) -> Result<TemporalStream, SelectorError> {
    if input.width() != sel.n {
        return Err(StreamError::WidthMismatch {
            expected: sel.n,
            got: input.width(),
        }
        .into());
    }
    let cycles = (0..input.cycles())
        .map(|t| eval_topk(sel, &input.cycle(t)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TemporalStream::from_cycles(sel.k, &cycles)?)
}

pub fn selector_counts(sel: &TopKSelector) -> SelectorCounts {
    SelectorCounts {
        total: sel.source_total,
        mandatory: sel.mandatory.len(),
        half: sel.half.len(),
    }
}

/// Parse the selector file format.
pub fn load_selector(text: &str) -> Result<TopKSelector, SelectorError> {
    let mut lines = content_lines(text);
    let mut header = |key: &str| -> Result<usize, NetworkError> {
        let (line, l) = lines.next().ok_or(NetworkError::Parse {
            line: 1,
            msg: format!("missing `{key}` header"),
        })?;
        parse_header(line, l, key)
    };
    let n = header("n")?;
    let k = header("k")?;
    let total = header("total")?;
    if n == 0 || n > crate::MAX_WIDTH {
        return Err(NetworkError::BadWidth(n).into());
    }
    if k == 0 || k > n {
        return Err(SelectorError::BadK { k, n });
    }
    let mut mandatory = Vec::new();
    let mut half = Vec::new();
    for (line, l) in lines {
        let parts: Vec<&str> = l.split_whitespace().collect();
        let (i, j, rest) = match parts.as_slice() {
            [i, j, rest @ ..] => (i, j, rest),
            _ => {
                return Err(NetworkError::Parse {
                    line,
                    msg: format!("expected `<i> <j> [H:<wire>]`, got {l:?}"),
                }
                .into())
            }
        };
        let unit = parse_unit(line, i, j, n)?;
        for tag in rest {
            let wire = tag
                .strip_prefix("H:")
                .and_then(|w| w.parse::<usize>().ok())
                .ok_or_else(|| NetworkError::Parse {
                    line,
                    msg: format!("bad half-unit tag {tag:?}"),
                })?;
            if !unit.touches(wire) {
                return Err(NetworkError::Parse {
                    line,
                    msg: format!("H:{wire} is not a wire of ({}, {})", unit.i, unit.j),
                }
                .into());
            }
            half.push(HalfUnit {
                position: mandatory.len(),
                dead_wire: wire,
            });
        }
        mandatory.push(unit);
    }
    if total < mandatory.len() {
        return Err(NetworkError::Parse {
            line: 3,
            msg: format!(
                "total {total} is below the {} listed units",
                mandatory.len()
            ),
        }
        .into());
    }
    let sel = TopKSelector {
        n,
        k,
        source_total: total,
        mandatory,
        half,
        warnings: Vec::new(),
    };
    sel.check_structure()?;
    Ok(sel)
}

impl FromStr for TopKSelector {
    type Err = SelectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        load_selector(s)
    }
}

/// True when `sub` appears in `full` in order (not necessarily contiguous).
pub fn is_subsequence(sub: &[CompareSwap], full: &[CompareSwap]) -> bool {
    let mut it = full.iter();
    sub.iter().all(|s| it.any(|f| f == s))
}
