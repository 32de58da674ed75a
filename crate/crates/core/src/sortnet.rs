// SPDX-License-Identifier: Apache-2.0
//! Compare-and-swap networks over single bits and temporal bit-streams.
//!
//! A unit `(i, j)` computes `AND(a_i, a_j)` onto wire `i` and `OR(a_i, a_j)`
//! onto wire `j`. On leading-0 unary streams that is `min` and `max` of the
//! two encoded values, so a sorter leaves the largest values on the highest
//! wires.
//!
//! Network file format (UTF-8, `#` starts a comment line):
//!
//! ```text
//! # optional comments
//! n 4
//! 0 1
//! 2 3
//! 0 2
//! 1 3
//! 1 2
//! ```

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bits::{width_mask, BitVector, StreamError, TemporalStream, MAX_WIDTH};

/// Largest width validated exhaustively (2^20 vectors).
pub const EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("bitonic networks need a power-of-two width in 2..=64, got {0}")]
    BadBitonicWidth(usize),
    #[error("no bundled network for width {0} (available: 4, 8, 16, 32, 64)")]
    NoBundled(usize),
    #[error("unit ({i}, {j}) is invalid for a {n}-wire network: need i < j < n")]
    BadUnit { i: usize, j: usize, n: usize },
    #[error("network width {0} outside 1..={MAX_WIDTH}")]
    BadWidth(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// One compare-and-swap unit. `i` receives the minimum (AND), `j` the maximum (OR).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CompareSwap {
    pub i: usize,
    pub j: usize,
}

impl CompareSwap {
    pub fn new(i: usize, j: usize, n: usize) -> Result<Self, NetworkError> {
        if i < j && j < n {
            Ok(CompareSwap { i, j })
        } else {
            Err(NetworkError::BadUnit { i, j, n })
        }
    }

    #[inline]
    pub fn touches(&self, wire: usize) -> bool {
        self.i == wire || self.j == wire
    }

    #[inline]
    pub(crate) fn apply(&self, bits: u64) -> u64 {
        let a = (bits >> self.i) & 1;
        let b = (bits >> self.j) & 1;
        // only (1, 0) changes anything: it becomes (0, 1)
        if a == 1 && b == 0 {
            bits ^ ((1 << self.i) | (1 << self.j))
        } else {
            bits
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    BitonicGenerated,
    LoadedOptimal,
    LoadedCustom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortingNetwork {
    n: usize,
    units: Vec<CompareSwap>,
    origin: Origin,
}

impl SortingNetwork {
    pub fn new(n: usize, units: Vec<CompareSwap>, origin: Origin) -> Result<Self, NetworkError> {
        if n == 0 || n > MAX_WIDTH {
            return Err(NetworkError::BadWidth(n));
        }
        if let Some(u) = units.iter().find(|u| !(u.i < u.j && u.j < n)) {
            return Err(NetworkError::BadUnit { i: u.i, j: u.j, n });
        }
        Ok(SortingNetwork { n, units, origin })
    }

    /// Build from `(i, j)` pairs; handy in tests and examples.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, NetworkError> {
        let units = pairs
            .iter()
            .map(|&(i, j)| CompareSwap::new(i, j, n))
            .collect::<Result<_, _>>()?;
        Self::new(n, units, Origin::LoadedCustom)
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn units(&self) -> &[CompareSwap] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    /// Bundled small sorters for widths 4, 8, 16, 32 and 64.
    pub fn bundled_optimal(n: usize) -> Result<Self, NetworkError> {
        let text = match n {
            4 => include_str!("../networks/optimal-4.net"),
            8 => include_str!("../networks/optimal-8.net"),
            16 => include_str!("../networks/optimal-16.net"),
            32 => include_str!("../networks/optimal-32.net"),
            64 => include_str!("../networks/optimal-64.net"),
            other => return Err(NetworkError::NoBundled(other)),
        };
        let mut net = load_network(text)?;
        net.origin = Origin::LoadedOptimal;
        Ok(net)
    }

    /// Apply every unit to one bit slice.
    pub fn eval_bits(&self, input: &BitVector) -> Result<BitVector, NetworkError> {
        if input.width() != self.n {
            return Err(StreamError::WidthMismatch {
                expected: self.n,
                got: input.width(),
            }
            .into());
        }
        Ok(BitVector::from_bits(
            self.n,
            self.eval_packed(input.bits()),
        )?)
    }

    #[inline]
    pub(crate) fn eval_packed(&self, mut bits: u64) -> u64 {
        for u in &self.units {
            bits = u.apply(bits);
        }
        bits
    }

    /// Bit-sliced evaluation: `lanes[w]` carries wire `w` for 64 independent inputs.
    pub(crate) fn eval_lanes(&self, lanes: &mut [u64]) {
        for u in &self.units {
            let (a, b) = (lanes[u.i], lanes[u.j]);
            lanes[u.i] = a & b;
            lanes[u.j] = a | b;
        }
    }

    /// Cycle-by-cycle evaluation of a temporal stream.
    pub fn eval_temporal(&self, input: &TemporalStream) -> Result<TemporalStream, NetworkError> {
        if input.width() != self.n {
            return Err(StreamError::WidthMismatch {
                expected: self.n,
                got: input.width(),
            }
            .into());
        }
        let cycles = (0..input.cycles())
            .map(|t| self.eval_bits(&input.cycle(t)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TemporalStream::from_cycles(self.n, &cycles)?)
    }

    /// Byte-stable text form.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# sorting network: {} wires, {} units\nn {}\n",
            self.n,
            self.units.len(),
            self.n
        );
        for u in &self.units {
            out.push_str(&format!("{} {}\n", u.i, u.j));
        }
        out
    }
}

impl fmt::Display for SortingNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for SortingNetwork {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        load_network(s)
    }
}

/// Non-comment, non-blank lines with 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(idx, l)| (idx + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub(crate) fn parse_header(line: usize, text: &str, key: &str) -> Result<usize, NetworkError> {
    let mut parts = text.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => v.parse().map_err(|_| NetworkError::Parse {
            line,
            msg: format!("`{key}` expects an unsigned integer, got {v:?}"),
        }),
        _ => Err(NetworkError::Parse {
            line,
            msg: format!("expected `{key} <count>`, got {text:?}"),
        }),
    }
}

pub(crate) fn parse_unit(
    line: usize,
    i: &str,
    j: &str,
    n: usize,
) -> Result<CompareSwap, NetworkError> {
    let idx = |s: &str| {
        s.parse::<usize>().map_err(|_| NetworkError::Parse {
            line,
            msg: format!("bad wire index {s:?}"),
        })
    };
    let (i, j) = (idx(i)?, idx(j)?);
    if i >= j {
        return Err(NetworkError::Parse {
            line,
            msg: format!("unit ({i}, {j}) needs i < j"),
        });
    }
    if j >= n {
        return Err(NetworkError::Parse {
            line,
            msg: format!("wire {j} out of range for n = {n}"),
        });
    }
    Ok(CompareSwap { i, j })
}

/// Parse the network file format. Units keep file order.
pub fn load_network(text: &str) -> Result<SortingNetwork, NetworkError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(NetworkError::Parse {
        line: 1,
        msg: "empty network file".into(),
    })?;
    let n = parse_header(hline, header, "n")?;
    if n == 0 || n > MAX_WIDTH {
        return Err(NetworkError::Parse {
            line: hline,
            msg: format!("width {n} outside 1..={MAX_WIDTH}"),
        });
    }
    let mut units = Vec::new();
    let mut last_line = hline;
    for (line, l) in lines {
        last_line = line;
        let parts: Vec<&str> = l.split_whitespace().collect();
        match parts.as_slice() {
            [i, j] => units.push(parse_unit(line, i, j, n)?),
            _ => {
                return Err(NetworkError::Parse {
                    line,
                    msg: format!("expected `<i> <j>`, got {l:?}"),
                })
            }
        }
    }
    if units.is_empty() {
        return Err(NetworkError::Parse {
            line: last_line,
            msg: "network has no units".into(),
        });
    }
    SortingNetwork::new(n, units, Origin::LoadedCustom)
}

/// Batcher bitonic sorter in the all-ascending layout: each merge stage starts
/// with a mirrored compare (`b + x` against `b + size - 1 - x`) so every unit
/// keeps the minimum on its lower wire.
pub fn gen_bitonic(n: usize) -> Result<SortingNetwork, NetworkError> {
    if !(2..=MAX_WIDTH).contains(&n) || !n.is_power_of_two() {
        return Err(NetworkError::BadBitonicWidth(n));
    }
    let mut units = Vec::new();
    let mut size = 2;
    while size <= n {
        for base in (0..n).step_by(size) {
            for x in 0..size / 2 {
                units.push(CompareSwap {
                    i: base + x,
                    j: base + size - 1 - x,
                });
            }
        }
        let mut half = size / 4;
        while half >= 1 {
            for base in (0..n).step_by(2 * half) {
                for x in 0..half {
                    units.push(CompareSwap {
                        i: base + x,
                        j: base + x + half,
                    });
                }
            }
            half /= 2;
        }
        size *= 2;
    }
    SortingNetwork::new(n, units, Origin::BitonicGenerated)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationBudget {
    /// Random vectors tried when the width is above [`EXHAUSTIVE_LIMIT`].
    pub random_vectors: u64,
    pub seed: u64,
}

impl Default for ValidationBudget {
    fn default() -> Self {
        ValidationBudget {
            random_vectors: 1 << 16,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub width: usize,
    pub units: usize,
    pub exhaustive: bool,
    pub vectors_checked: u64,
    pub passed: bool,
    /// First input (in check order) that came out unsorted.
    #[serde(serialize_with = "ser_opt_bits")]
    pub counterexample: Option<BitVector>,
    #[serde(serialize_with = "ser_opt_bits")]
    pub counterexample_output: Option<BitVector>,
}

fn ser_opt_bits<S: serde::Serializer>(v: &Option<BitVector>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(b) => s.serialize_some(&b.to_string()),
        None => s.serialize_none(),
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = if self.exhaustive {
            "exhaustive"
        } else {
            "structured+random"
        };
        if self.passed {
            write!(
                f,
                "PASS: {}-wire network ({} units) sorts {} / {} vectors ({mode})",
                self.width, self.units, self.vectors_checked, self.vectors_checked
            )
        } else {
            write!(f, "FAIL: {}-wire network ({} units) leaves {} unsorted as {} ({mode}, {} vectors checked)",
                self.width, self.units,
                self.counterexample.map(|b| b.to_string()).unwrap_or_default(),
                self.counterexample_output.map(|b| b.to_string()).unwrap_or_default(),
                self.vectors_checked)
        }
    }
}

/// Lane mask of unsorted results: a set lane means some wire `w` holds 1
/// while wire `w + 1` holds 0.
fn unsorted_lanes(lanes: &[u64]) -> u64 {
    lanes.windows(2).fold(0, |acc, w| acc | (w[0] & !w[1]))
}

/// Check 64 packed inputs at once; returns the first failing input.
fn check_batch(net: &SortingNetwork, inputs: &[u64]) -> Option<u64> {
    let n = net.width();
    let mut lanes = vec![0u64; n];
    for (lane, &v) in inputs.iter().enumerate() {
        for (w, l) in lanes.iter_mut().enumerate() {
            *l |= ((v >> w) & 1) << lane;
        }
    }
    net.eval_lanes(&mut lanes);
    let bad = unsorted_lanes(&lanes) & width_mask(inputs.len());
    (bad != 0).then(|| inputs[bad.trailing_zeros() as usize])
}

/// Zero-one check: exhaustive up to [`EXHAUSTIVE_LIMIT`] wires, otherwise all
/// single-one and single-zero patterns plus `budget.random_vectors` seeded
/// random vectors.
pub fn validate_sorter(net: &SortingNetwork, budget: ValidationBudget) -> ValidationReport {
    let n = net.width();
    let mut report = ValidationReport {
        width: n,
        units: net.len(),
        exhaustive: n <= EXHAUSTIVE_LIMIT,
        vectors_checked: 0,
        passed: true,
        counterexample: None,
        counterexample_output: None,
    };
    let fail = |report: &mut ValidationReport, v: u64| {
        let input = BitVector::from_bits(n, v).expect("width checked at construction");
        report.passed = false;
        report.counterexample = Some(input);
        report.counterexample_output = Some(BitVector::from_bits(n, net.eval_packed(v)).unwrap());
    };

    if report.exhaustive {
        let total = 1u64 << n;
        let lanes = |base: u64| -> Vec<u64> { (base..(base + 64).min(total)).collect() };
        let mut base = 0;
        while base < total {
            let batch = lanes(base);
            report.vectors_checked += batch.len() as u64;
            if let Some(v) = check_batch(net, &batch) {
                fail(&mut report, v);
                return report;
            }
            base += 64;
        }
        return report;
    }

    let full = width_mask(n);
    let mut structured: Vec<u64> = (0..n).map(|w| 1u64 << w).collect();
    structured.extend((0..n).map(|w| full & !(1u64 << w)));
    structured.push(0);
    structured.push(full);
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let random = (0..budget.random_vectors).map(|_| rng.gen::<u64>() & full);
    let all: Vec<u64> = structured.into_iter().chain(random).collect();
    for chunk in all.chunks(64) {
        report.vectors_checked += chunk.len() as u64;
        if let Some(v) = check_batch(net, chunk) {
            fail(&mut report, v);
            return report;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook recursive bitonic sort with explicit directions, counting
    /// comparators only. Independent of the iterative generator above.
    fn textbook_bitonic_count(n: usize) -> usize {
        fn sort(n: usize) -> usize {
            if n <= 1 {
                0
            } else {
                2 * sort(n / 2) + merge(n)
            }
        }
        fn merge(n: usize) -> usize {
            if n <= 1 {
                0
            } else {
                n / 2 + 2 * merge(n / 2)
            }
        }
        sort(n)
    }

    #[test]
    fn bitonic_unit_counts() {
        assert_eq!(
            gen_bitonic(2).unwrap().units(),
            &[CompareSwap { i: 0, j: 1 }]
        );
        assert_eq!(gen_bitonic(8).unwrap().len(), 24);
        assert_eq!(gen_bitonic(16).unwrap().len(), 80);
        for n in [2usize, 4, 8, 16, 32, 64] {
            let l = n.trailing_zeros() as usize;
            let net = gen_bitonic(n).unwrap();
            assert_eq!(net.len(), (n / 2) * l * (l + 1) / 2, "n={n}");
            assert_eq!(net.len(), textbook_bitonic_count(n), "n={n}");
        }
    }

    #[test]
    fn bitonic_rejects_bad_widths() {
        for n in [0usize, 1, 6, 12, 128] {
            assert_eq!(
                gen_bitonic(n).unwrap_err(),
                NetworkError::BadBitonicWidth(n)
            );
        }
    }

    #[test]
    fn single_unit_eval() {
        let net = SortingNetwork::from_pairs(2, &[(0, 1)]).unwrap();
        let out = net.eval_bits(&"10".parse().unwrap()).unwrap();
        assert_eq!(out.to_string(), "01");
    }

    #[test]
    fn bitonic8_example() {
        let net = gen_bitonic(8).unwrap();
        let out = net.eval_bits(&"10110100".parse().unwrap()).unwrap();
        assert_eq!(out.to_string(), "00001111");
    }

    #[test]
    fn width_mismatch() {
        let net = gen_bitonic(8).unwrap();
        let err = net.eval_bits(&"1011".parse().unwrap()).unwrap_err();
        assert_eq!(
            err,
            NetworkError::Stream(StreamError::WidthMismatch {
                expected: 8,
                got: 4
            })
        );
    }

    #[test]
    fn temporal_min_max() {
        let net = SortingNetwork::from_pairs(2, &[(0, 1)]).unwrap();
        let s = TemporalStream::from_wire_strings(&["00001111", "00111111"]).unwrap();
        let out = net.eval_temporal(&s).unwrap();
        assert_eq!(out.wire_string(0), "00001111");
        assert_eq!(out.wire_string(1), "00111111");
        // swapped inputs give the same answer
        let s = TemporalStream::from_wire_strings(&["00111111", "00001111"]).unwrap();
        let out = net.eval_temporal(&s).unwrap();
        assert_eq!(out.wire_string(0), "00001111");
        assert_eq!(out.wire_string(1), "00111111");
    }

    #[test]
    fn parse_minimal_and_errors() {
        let net = load_network("n 2\n0 1\n").unwrap();
        assert_eq!((net.width(), net.len()), (2, 1));
        assert_eq!(net.origin(), Origin::LoadedCustom);

        let err = load_network("# c\nn 4\n0 1\n3 1\n").unwrap_err();
        assert!(matches!(err, NetworkError::Parse { line: 4, .. }), "{err}");
        let err = load_network("n 4\n0 4\n").unwrap_err();
        assert!(matches!(err, NetworkError::Parse { line: 2, .. }), "{err}");
        let err = load_network("n 4\n0 1 2\n").unwrap_err();
        assert!(matches!(err, NetworkError::Parse { line: 2, .. }), "{err}");
        let err = load_network("n 4\n").unwrap_err();
        assert!(matches!(err, NetworkError::Parse { .. }), "{err}");
        let err = load_network("").unwrap_err();
        assert!(matches!(err, NetworkError::Parse { line: 1, .. }), "{err}");
        let err = load_network("width 4\n0 1\n").unwrap_err();
        assert!(matches!(err, NetworkError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn text_roundtrip_is_byte_stable() {
        let net = gen_bitonic(16).unwrap();
        let text = net.to_text();
        let back = load_network(&text).unwrap();
        assert_eq!(back.units(), net.units());
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn bundled_networks() {
        let expected_units = [(4, 5), (8, 19), (16, 60)];
        for (n, units) in expected_units {
            let net = SortingNetwork::bundled_optimal(n).unwrap();
            assert_eq!(net.len(), units, "n={n}");
            assert_eq!(net.origin(), Origin::LoadedOptimal);
        }
        for n in [4, 8, 16, 32, 64] {
            let net = SortingNetwork::bundled_optimal(n).unwrap();
            assert!(
                validate_sorter(&net, ValidationBudget::default()).passed,
                "n={n}"
            );
        }
        assert_eq!(
            SortingNetwork::bundled_optimal(12).unwrap_err(),
            NetworkError::NoBundled(12)
        );
    }

    #[test]
    fn validate_exhaustive_counts() {
        let r = validate_sorter(&gen_bitonic(8).unwrap(), ValidationBudget::default());
        assert!(r.passed && r.exhaustive);
        assert_eq!(r.vectors_checked, 256);
        let r = validate_sorter(&gen_bitonic(2).unwrap(), ValidationBudget::default());
        assert_eq!(r.vectors_checked, 4);
    }

    #[test]
    fn validate_finds_counterexample_after_deletion() {
        let full = gen_bitonic(8).unwrap();
        for drop in 0..full.len() {
            let mut units = full.units().to_vec();
            units.remove(drop);
            let net = SortingNetwork::new(8, units, Origin::LoadedCustom).unwrap();
            let r = validate_sorter(&net, ValidationBudget::default());
            assert!(!r.passed, "dropping unit {drop} still sorts");
            let ce = r.counterexample.unwrap();
            assert!(!net.eval_bits(&ce).unwrap().is_sorted());
        }
    }

    #[test]
    fn validate_large_width_structured() {
        let r = validate_sorter(
            &gen_bitonic(32).unwrap(),
            ValidationBudget {
                random_vectors: 4096,
                seed: 1,
            },
        );
        assert!(r.passed && !r.exhaustive);
        assert_eq!(r.vectors_checked, 2 * 32 + 2 + 4096);
        // an identity-ish network fails on a single-one pattern
        let bad = SortingNetwork::from_pairs(32, &[(0, 1)]).unwrap();
        let r = validate_sorter(
            &bad,
            ValidationBudget {
                random_vectors: 0,
                seed: 1,
            },
        );
        assert!(!r.passed);
    }
}
