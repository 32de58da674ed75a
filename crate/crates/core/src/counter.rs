// SPDX-License-Identifier: Apache-2.0
//! Structural parallel counters (popcount circuits) built from half and full
//! adders.
//!
//! * [`CounterKind::Compact`]: column-wise reduction using full adders only.
//!   A column with three or more bits feeds a full adder; a column with
//!   exactly two bits feeds a full adder whose third input is tied to zero.
//!   For `n = 2^m` inputs this uses exactly `n - 1` full adders.
//! * [`CounterKind::AdderTree`]: the conventional tree. Each half of the
//!   inputs is counted recursively and the two binary results are summed by a
//!   ripple-carry adder (half adder where only two bits meet, full adder
//!   otherwise).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub type NetId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CounterKind {
    Compact,
    AdderTree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdderCell {
    Half {
        a: NetId,
        b: NetId,
        sum: NetId,
        carry: NetId,
    },
    Full {
        a: NetId,
        b: NetId,
        cin: NetId,
        sum: NetId,
        carry: NetId,
    },
}

/// A popcount circuit over `inputs` bits.
///
/// Nets `0..inputs` are the primary inputs and net `inputs` is constant zero;
/// every cell allocates two fresh nets after that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCounter {
    kind: CounterKind,
    inputs: usize,
    cells: Vec<AdderCell>,
    outputs: Vec<NetId>,
    nets: usize,
}

struct Builder {
    cells: Vec<AdderCell>,
    nets: usize,
}

impl Builder {
    fn fresh(&mut self) -> (NetId, NetId) {
        self.nets += 2;
        (self.nets - 2, self.nets - 1)
    }

    fn half(&mut self, a: NetId, b: NetId) -> (NetId, NetId) {
        let (sum, carry) = self.fresh();
        self.cells.push(AdderCell::Half { a, b, sum, carry });
        (sum, carry)
    }

    fn full(&mut self, a: NetId, b: NetId, cin: NetId) -> (NetId, NetId) {
        let (sum, carry) = self.fresh();
        self.cells.push(AdderCell::Full {
            a,
            b,
            cin,
            sum,
            carry,
        });
        (sum, carry)
    }

    /// Ripple-carry sum of two LSB-first binary numbers.
    fn ripple_add(&mut self, x: &[NetId], y: &[NetId]) -> Vec<NetId> {
        let width = x.len().max(y.len());
        let mut out = Vec::with_capacity(width + 1);
        let mut carry: Option<NetId> = None;
        for bit in 0..width {
            let operands: Vec<NetId> = [x.get(bit), y.get(bit), carry.as_ref()]
                .into_iter()
                .flatten()
                .copied()
                .collect();
            let (s, c) = match operands.as_slice() {
                [a] => (*a, None),
                [a, b] => {
                    let (s, c) = self.half(*a, *b);
                    (s, Some(c))
                }
                [a, b, cin] => {
                    let (s, c) = self.full(*a, *b, *cin);
                    (s, Some(c))
                }
                _ => unreachable!("at least one operand per bit below width"),
            };
            out.push(s);
            carry = c;
        }
        out.extend(carry);
        out
    }

    fn tree(&mut self, inputs: &[NetId]) -> Vec<NetId> {
        match inputs.len() {
            0 => Vec::new(),
            1 => vec![inputs[0]],
            len => {
                let (lo, hi) = inputs.split_at(len / 2);
                let a = self.tree(lo);
                let b = self.tree(hi);
                self.ripple_add(&a, &b)
            }
        }
    }

    fn compact(&mut self, inputs: &[NetId], zero: NetId) -> Vec<NetId> {
        let mut columns: Vec<VecDeque<NetId>> = vec![inputs.iter().copied().collect()];
        let mut outputs = Vec::new();
        let mut c = 0;
        while c < columns.len() {
            loop {
                let len = columns[c].len();
                if len < 2 {
                    break;
                }
                let a = columns[c].pop_front().unwrap();
                let b = columns[c].pop_front().unwrap();
                let cin = if len >= 3 {
                    columns[c].pop_front().unwrap()
                } else {
                    zero
                };
                let (s, carry) = self.full(a, b, cin);
                columns[c].push_back(s);
                if columns.len() == c + 1 {
                    columns.push(VecDeque::new());
                }
                columns[c + 1].push_back(carry);
            }
            if let Some(&bit) = columns[c].front() {
                outputs.push(bit);
            }
            c += 1;
        }
        outputs
    }
}

impl ParallelCounter {
    pub fn new(kind: CounterKind, inputs: usize) -> Self {
        let zero = inputs;
        let mut b = Builder {
            cells: Vec::new(),
            nets: inputs + 1,
        };
        let ins: Vec<NetId> = (0..inputs).collect();
        let outputs = match kind {
            CounterKind::Compact => b.compact(&ins, zero),
            CounterKind::AdderTree => b.tree(&ins),
        };
        ParallelCounter {
            kind,
            inputs,
            cells: b.cells,
            outputs,
            nets: b.nets,
        }
    }

    pub fn kind(&self) -> CounterKind {
        self.kind
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn zero_net(&self) -> NetId {
        self.inputs
    }

    pub fn cells(&self) -> &[AdderCell] {
        &self.cells
    }

    /// Sum bits, least significant first.
    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn net_count(&self) -> usize {
        self.nets
    }

    pub fn half_adders(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(c, AdderCell::Half { .. }))
            .count()
    }

    pub fn full_adders(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(c, AdderCell::Full { .. }))
            .count()
    }

    /// True if some full adder has its carry-in tied to zero.
    pub fn uses_zero(&self) -> bool {
        self.cells
            .iter()
            .any(|c| matches!(c, AdderCell::Full { cin, .. } if *cin == self.zero_net()))
    }

    /// Gate-level evaluation; bit `i` of `bits` drives input `i`.
    pub fn eval(&self, bits: u64) -> u32 {
        let mut v = vec![false; self.nets];
        for (i, slot) in v.iter_mut().enumerate().take(self.inputs) {
            *slot = (bits >> i) & 1 == 1;
        }
        for cell in &self.cells {
            match *cell {
                AdderCell::Half { a, b, sum, carry } => {
                    v[sum] = v[a] ^ v[b];
                    v[carry] = v[a] & v[b];
                }
                AdderCell::Full {
                    a,
                    b,
                    cin,
                    sum,
                    carry,
                } => {
                    v[sum] = v[a] ^ v[b] ^ v[cin];
                    v[carry] = (v[a] & v[b]) | (v[cin] & (v[a] ^ v[b]));
                }
            }
        }
        self.outputs
            .iter()
            .enumerate()
            .map(|(i, &net)| (v[net] as u32) << i)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compact_uses_n_minus_one_full_adders_for_powers_of_two() {
        for n in [2usize, 4, 8, 16, 32, 64] {
            let pc = ParallelCounter::new(CounterKind::Compact, n);
            assert_eq!(pc.full_adders(), n - 1, "n={n}");
            assert_eq!(pc.half_adders(), 0);
            assert_eq!(pc.outputs().len(), n.trailing_zeros() as usize + 1);
        }
    }

    #[test]
    fn single_input_is_a_wire() {
        for kind in [CounterKind::Compact, CounterKind::AdderTree] {
            let pc = ParallelCounter::new(kind, 1);
            assert!(pc.cells().is_empty());
            assert_eq!(pc.eval(1), 1);
            assert_eq!(pc.eval(0), 0);
        }
    }

    #[test]
    fn exhaustive_popcount_small() {
        for n in 1..=12usize {
            for kind in [CounterKind::Compact, CounterKind::AdderTree] {
                let pc = ParallelCounter::new(kind, n);
                for v in 0..(1u64 << n) {
                    assert_eq!(pc.eval(v), v.count_ones(), "{kind:?} n={n} v={v:b}");
                }
            }
        }
    }

    #[test]
    fn adder_tree_counts_n4() {
        // one HA per input pair, then a 2-bit ripple add: HA at bit 0, FA at bit 1
        let pc = ParallelCounter::new(CounterKind::AdderTree, 4);
        assert_eq!((pc.half_adders(), pc.full_adders()), (3, 1));
    }
}
