// SPDX-License-Identifier: Apache-2.0
//! Interchangeable dendrite implementations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::NeuronError;
use crate::bits::{BitVector, MAX_WIDTH};
use crate::counter::{CounterKind, ParallelCounter};
use crate::sortnet::{gen_bitonic, SortingNetwork};
use crate::topk::{eval_topk, prune_topk, TopKSelector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DendriteKind {
    /// Adder-tree parallel counter over all inputs.
    PcConventional,
    /// Full-adder-only parallel counter over all inputs.
    PcCompact,
    /// Full sorter, then a small counter over the bottom `k` wires.
    SortingPc,
    /// Pruned top-k selector, then a small counter over its `k` outputs.
    TopkPc,
}

impl DendriteKind {
    pub const ALL: [DendriteKind; 4] = [
        DendriteKind::PcConventional,
        DendriteKind::PcCompact,
        DendriteKind::SortingPc,
        DendriteKind::TopkPc,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DendriteKind::PcConventional => "pc-conventional",
            DendriteKind::PcCompact => "pc-compact",
            DendriteKind::SortingPc => "sorting-pc",
            DendriteKind::TopkPc => "topk-pc",
        }
    }

    pub fn needs_k(self) -> bool {
        matches!(self, DendriteKind::SortingPc | DendriteKind::TopkPc)
    }
}

impl fmt::Display for DendriteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DendriteKind {
    type Err = NeuronError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DendriteKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| NeuronError::Config(format!("unknown dendrite kind {s:?}")))
    }
}

/// Default source sorter for a dendrite: the bundled small sorter for top-k,
/// bitonic for full sorting, at the next power-of-two width.
pub fn default_source(kind: DendriteKind, n: usize) -> Result<SortingNetwork, NeuronError> {
    let width = n.max(2).next_power_of_two();
    if width > MAX_WIDTH {
        return Err(NeuronError::Config(format!(
            "{n} inputs exceed the {MAX_WIDTH}-wire limit"
        )));
    }
    let net = match kind {
        DendriteKind::TopkPc => {
            SortingNetwork::bundled_optimal(width).or_else(|_| gen_bitonic(width))?
        }
        _ => gen_bitonic(width)?,
    };
    Ok(net)
}

#[derive(Debug, Clone)]
pub enum Dendrite {
    PcConventional {
        counter: ParallelCounter,
    },
    PcCompact {
        counter: ParallelCounter,
    },
    SortingPc {
        n: usize,
        k: usize,
        network: SortingNetwork,
        counter: ParallelCounter,
    },
    TopkPc {
        n: usize,
        selector: TopKSelector,
        counter: ParallelCounter,
    },
}

impl Dendrite {
    /// Build a dendrite for `n` inputs. Sorting kinds take `source` or fall back
    /// to [`default_source`]; a source wider than `n` has its spare inputs tied
    /// to zero.
    pub fn build(
        kind: DendriteKind,
        n: usize,
        k: Option<usize>,
        source: Option<&SortingNetwork>,
    ) -> Result<Self, NeuronError> {
        if n == 0 || n > MAX_WIDTH {
            return Err(NeuronError::Config(format!(
                "input count {n} outside 1..={MAX_WIDTH}"
            )));
        }
        let k = match (kind.needs_k(), k) {
            (true, None) => return Err(NeuronError::MissingK(kind)),
            (true, Some(k)) if k == 0 || k > n => {
                return Err(NeuronError::Config(format!("k = {k} out of range 1..={n}")))
            }
            (_, k) => k,
        };
        let network = || -> Result<SortingNetwork, NeuronError> {
            let net = match source {
                Some(s) => s.clone(),
                None => default_source(kind, n)?,
            };
            if net.width() < n {
                return Err(NeuronError::Config(format!(
                    "source network has {} wires, need at least {n}",
                    net.width()
                )));
            }
            Ok(net)
        };
        Ok(match kind {
            DendriteKind::PcConventional => Dendrite::PcConventional {
                counter: ParallelCounter::new(CounterKind::AdderTree, n),
            },
            DendriteKind::PcCompact => Dendrite::PcCompact {
                counter: ParallelCounter::new(CounterKind::Compact, n),
            },
            DendriteKind::SortingPc => {
                let k = k.expect("checked above");
                Dendrite::SortingPc {
                    n,
                    k,
                    network: network()?,
                    counter: ParallelCounter::new(CounterKind::Compact, k),
                }
            }
            DendriteKind::TopkPc => {
                let k = k.expect("checked above");
                let selector = prune_topk(&network()?, k)?;
                Dendrite::TopkPc {
                    n,
                    selector,
                    counter: ParallelCounter::new(CounterKind::Compact, k),
                }
            }
        })
    }

    pub fn kind(&self) -> DendriteKind {
        match self {
            Dendrite::PcConventional { .. } => DendriteKind::PcConventional,
            Dendrite::PcCompact { .. } => DendriteKind::PcCompact,
            Dendrite::SortingPc { .. } => DendriteKind::SortingPc,
            Dendrite::TopkPc { .. } => DendriteKind::TopkPc,
        }
    }

    pub fn inputs(&self) -> usize {
        match self {
            Dendrite::PcConventional { counter } | Dendrite::PcCompact { counter } => {
                counter.inputs()
            }
            Dendrite::SortingPc { n, .. } | Dendrite::TopkPc { n, .. } => *n,
        }
    }

    /// Number of pulses the dendrite can pass per cycle.
    pub fn k(&self) -> Option<usize> {
        match self {
            Dendrite::SortingPc { k, .. } => Some(*k),
            Dendrite::TopkPc { selector, .. } => Some(selector.k()),
            _ => None,
        }
    }

    /// Counter that produces the increment.
    pub fn counter(&self) -> &ParallelCounter {
        match self {
            Dendrite::PcConventional { counter }
            | Dendrite::PcCompact { counter }
            | Dendrite::SortingPc { counter, .. }
            | Dendrite::TopkPc { counter, .. } => counter,
        }
    }

    /// Per-cycle increment for one slice of synapse pulses.
    pub fn increment(&self, pulses: &BitVector) -> Result<u32, NeuronError> {
        let n = self.inputs();
        if pulses.width() != n {
            return Err(NeuronError::Width {
                expected: n,
                got: pulses.width(),
            });
        }
        Ok(match self {
            Dendrite::PcConventional { counter } | Dendrite::PcCompact { counter } => {
                counter.eval(pulses.bits())
            }
            Dendrite::SortingPc {
                k,
                network,
                counter,
                ..
            } => {
                let sorted = network.eval_bits(&pulses.widen(network.width())?)?;
                counter.eval(sorted.slice(network.width() - k, *k).bits())
            }
            Dendrite::TopkPc {
                selector, counter, ..
            } => {
                let top = eval_topk(selector, &pulses.widen(selector.width())?)?;
                counter.eval(top.bits())
            }
        })
    }
}

/// One-shot increment using the default source networks.
pub fn dendrite_increment(
    kind: DendriteKind,
    k: Option<usize>,
    pulses: &BitVector,
) -> Result<u32, NeuronError> {
    Dendrite::build(kind, pulses.width(), k, None)?.increment(pulses)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let p: BitVector = "10110100".parse().unwrap();
        assert_eq!(
            dendrite_increment(DendriteKind::PcCompact, None, &p).unwrap(),
            4
        );
        assert_eq!(
            dendrite_increment(DendriteKind::PcConventional, None, &p).unwrap(),
            4
        );
        assert_eq!(
            dendrite_increment(DendriteKind::TopkPc, Some(2), &p).unwrap(),
            2
        );
        assert_eq!(
            dendrite_increment(DendriteKind::SortingPc, Some(2), &p).unwrap(),
            2
        );
        let p: BitVector = "00000100".parse().unwrap();
        assert_eq!(
            dendrite_increment(DendriteKind::TopkPc, Some(2), &p).unwrap(),
            1
        );
    }

    #[test]
    fn missing_k() {
        let p: BitVector = "1011".parse().unwrap();
        assert!(matches!(
            dendrite_increment(DendriteKind::TopkPc, None, &p),
            Err(NeuronError::MissingK(DendriteKind::TopkPc))
        ));
        assert!(matches!(
            dendrite_increment(DendriteKind::SortingPc, None, &p),
            Err(NeuronError::MissingK(DendriteKind::SortingPc))
        ));
    }

    #[test]
    fn non_power_of_two_inputs_are_padded() {
        for n in [3usize, 5, 12, 20] {
            let d = Dendrite::build(DendriteKind::TopkPc, n, Some(2), None).unwrap();
            for v in [0u64, 1, 0b101, (1 << n) - 1] {
                let p = BitVector::from_bits(n, v).unwrap();
                assert_eq!(
                    d.increment(&p).unwrap(),
                    v.count_ones().min(2),
                    "n={n} v={v:b}"
                );
            }
        }
    }

    #[test]
    fn width_checked() {
        let d = Dendrite::build(DendriteKind::PcCompact, 8, None, None).unwrap();
        assert!(matches!(
            d.increment(&"101".parse().unwrap()),
            Err(NeuronError::Width {
                expected: 8,
                got: 3
            })
        ));
    }

    #[test]
    fn kind_labels_roundtrip() {
        for k in DendriteKind::ALL {
            assert_eq!(k.label().parse::<DendriteKind>().unwrap(), k);
            assert_eq!(
                serde_json::to_string(&k).unwrap(),
                format!("\"{}\"", k.label())
            );
        }
    }
}
