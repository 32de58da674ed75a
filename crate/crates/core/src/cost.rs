// SPDX-License-Identifier: Apache-2.0
//! Gate-equivalent (GE) cost reports.
//!
//! Costs are structural: every report is a cell census of the circuit the
//! rest of the crate actually builds, weighted by [`CellWeights`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counter::{CounterKind, ParallelCounter};
use crate::neuron::{DendriteKind, NeuronConfig};
use crate::sortnet::SortingNetwork;
use crate::topk::{prune_topk, Gate, SelectorError, TopKSelector};

#[derive(Debug, Error)]
pub enum CostError {
    #[error("{0} needs a source sorting network")]
    MissingSource(DendriteKind),
    #[error("{0} needs k")]
    MissingK(DendriteKind),
    #[error("source network has {width} wires, design has {n} inputs")]
    SourceTooNarrow { width: usize, n: usize },
    #[error(transparent)]
    Selector(#[from] SelectorError),
}

/// GE per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellWeights {
    pub and2: u32,
    pub or2: u32,
    pub half_adder: u32,
    pub full_adder: u32,
    pub dff: u32,
}

impl Default for CellWeights {
    fn default() -> Self {
        CellWeights {
            and2: 1,
            or2: 1,
            half_adder: 3,
            full_adder: 5,
            dff: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateReport {
    pub design: String,
    pub n: usize,
    pub k: Option<usize>,
    pub and2: u32,
    pub or2: u32,
    pub half_adders: u32,
    pub full_adders: u32,
    /// Gates dropped from half compare-and-swap units.
    pub removed_gates: u32,
    pub selector_ge: u32,
    pub pc_ge: u32,
    pub total_ge: u32,
}

#[derive(Clone, Copy, Default)]
struct Logic {
    and2: u32,
    or2: u32,
    removed: u32,
}

impl GateReport {
    fn assemble(
        design: String,
        n: usize,
        k: Option<usize>,
        logic: Logic,
        pc: &ParallelCounter,
        w: &CellWeights,
    ) -> Self {
        let Logic { and2, or2, removed } = logic;
        let half_adders = pc.half_adders() as u32;
        let full_adders = pc.full_adders() as u32;
        let selector_ge = and2 * w.and2 + or2 * w.or2;
        let pc_ge = half_adders * w.half_adder + full_adders * w.full_adder;
        GateReport {
            design,
            n,
            k,
            and2,
            or2,
            half_adders,
            full_adders,
            removed_gates: removed,
            selector_ge,
            pc_ge,
            total_ge: selector_ge + pc_ge,
        }
    }

    /// Two-input logic gates (AND2 plus OR2).
    pub fn logic_gates(&self) -> u32 {
        self.and2 + self.or2
    }

    /// Total GE recomputed from the cell counts.
    pub fn recompute(&self, w: &CellWeights) -> u32 {
        self.and2 * w.and2
            + self.or2 * w.or2
            + self.half_adders * w.half_adder
            + self.full_adders * w.full_adder
    }
}

/// Cell census of a selector on its own.
pub fn selector_gates(sel: &TopKSelector, w: &CellWeights) -> GateReport {
    let units = sel.mandatory().len() as u32;
    let (mut and2, mut or2) = (units, units);
    for h in sel.half_units() {
        match sel.removed_gate(h) {
            Gate::And => and2 -= 1,
            Gate::Or => or2 -= 1,
        }
    }
    let mut r = GateReport::assemble(
        format!("topk[k={}]", sel.k()),
        sel.width(),
        Some(sel.k()),
        Logic {
            and2,
            or2,
            removed: sel.half_units().len() as u32,
        },
        &ParallelCounter::new(CounterKind::Compact, 0),
        w,
    );
    r.total_ge = r.selector_ge;
    r
}

/// Cell census of a complete dendrite. Sorting and top-k kinds feed their
/// `k` outputs into a compact counter.
pub fn dendrite_gates(
    kind: DendriteKind,
    n: usize,
    k: Option<usize>,
    source: Option<&SortingNetwork>,
    w: &CellWeights,
) -> Result<GateReport, CostError> {
    let label = kind.label().to_string();
    let sorter = || -> Result<(&SortingNetwork, usize), CostError> {
        let k = k.ok_or(CostError::MissingK(kind))?;
        let net = source.ok_or(CostError::MissingSource(kind))?;
        if net.width() < n {
            return Err(CostError::SourceTooNarrow {
                width: net.width(),
                n,
            });
        }
        Ok((net, k))
    };
    Ok(match kind {
        DendriteKind::PcCompact | DendriteKind::PcConventional => {
            let ck = if kind == DendriteKind::PcCompact {
                CounterKind::Compact
            } else {
                CounterKind::AdderTree
            };
            GateReport::assemble(
                label,
                n,
                None,
                Logic::default(),
                &ParallelCounter::new(ck, n),
                w,
            )
        }
        DendriteKind::SortingPc => {
            let (net, k) = sorter()?;
            if k == 0 || k > net.width() {
                return Err(SelectorError::BadK { k, n: net.width() }.into());
            }
            let units = net.len() as u32;
            GateReport::assemble(
                label,
                n,
                Some(k),
                Logic {
                    and2: units,
                    or2: units,
                    removed: 0,
                },
                &ParallelCounter::new(CounterKind::Compact, k),
                w,
            )
        }
        DendriteKind::TopkPc => {
            let (net, k) = sorter()?;
            let sel = prune_topk(net, k)?;
            let s = selector_gates(&sel, w);
            let logic = Logic {
                and2: s.and2,
                or2: s.or2,
                removed: s.removed_gates,
            };
            GateReport::assemble(
                label,
                n,
                Some(k),
                logic,
                &ParallelCounter::new(CounterKind::Compact, k),
                w,
            )
        }
    })
}

/// Every dendrite kind for `n` inputs, with each named source network used
/// for the sorting and top-k kinds, cheapest first.
pub fn rank_designs(
    n: usize,
    k: usize,
    networks: &[(&str, &SortingNetwork)],
    w: &CellWeights,
) -> Result<Vec<GateReport>, CostError> {
    let mut rows = vec![
        dendrite_gates(DendriteKind::PcConventional, n, None, None, w)?,
        dendrite_gates(DendriteKind::PcCompact, n, None, None, w)?,
    ];
    for &(name, net) in networks {
        for kind in [DendriteKind::SortingPc, DendriteKind::TopkPc] {
            let mut r = dendrite_gates(kind, n, Some(k), Some(net), w)?;
            r.design = format!("{}/{name}", r.design);
            rows.push(r);
        }
    }
    rows.sort_by(|a, b| {
        a.total_ge
            .cmp(&b.total_ge)
            .then_with(|| a.design.cmp(&b.design))
    });
    Ok(rows)
}

/// Soma and axon hardware, identical across dendrite designs: a `B`-bit
/// accumulator register with its adder, a `B`-bit threshold comparator and a
/// pulse-length counter for the axon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SomaEstimate {
    pub full_adders: u32,
    pub flops: u32,
    pub ge: u32,
}

pub fn soma_estimate(cfg: &NeuronConfig, w: &CellWeights) -> SomaEstimate {
    let b = cfg.acc_bits;
    let pulse_bits = u32::BITS - cfg.pulse_len.leading_zeros();
    let full_adders = 2 * b + pulse_bits;
    let flops = b + pulse_bits + 1;
    SomaEstimate {
        full_adders,
        flops,
        ge: full_adders * w.full_adder + flops * w.dff,
    }
}

pub fn reports_csv(reports: &[GateReport]) -> String {
    let mut wr = csv::Writer::from_writer(Vec::new());
    for r in reports {
        wr.serialize(r).expect("in-memory CSV write");
    }
    String::from_utf8(wr.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

pub fn reports_json(reports: &[GateReport]) -> String {
    serde_json::to_string_pretty(reports).expect("plain data serializes")
}

/// `n,k,design,ge` rows for bar charts.
pub fn plot_rows(reports: &[GateReport]) -> String {
    let mut s = String::from("n,k,design,ge\n");
    for r in reports {
        let k = r.k.map(|k| k.to_string()).unwrap_or_default();
        s.push_str(&format!("{},{},{},{}\n", r.n, k, r.design, r.total_ge));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sortnet::gen_bitonic;

    fn w() -> CellWeights {
        CellWeights::default()
    }

    #[test]
    fn selector_gate_counts_n8() {
        let opt = prune_topk(&SortingNetwork::bundled_optimal(8).unwrap(), 2).unwrap();
        let bit = prune_topk(&gen_bitonic(8).unwrap(), 2).unwrap();
        assert_eq!(selector_gates(&opt, &w()).logic_gates(), 2 * 14 - 6);
        assert_eq!(selector_gates(&bit, &w()).logic_gates(), 2 * 19 - 6);
    }

    #[test]
    fn unpruned_selector_keeps_every_gate() {
        let net = gen_bitonic(8).unwrap();
        let r = selector_gates(&prune_topk(&net, 8).unwrap(), &w());
        assert_eq!((r.and2, r.or2, r.removed_gates), (24, 24, 0));
    }

    #[test]
    fn dendrite_reports() {
        let pc = dendrite_gates(DendriteKind::PcCompact, 16, None, None, &w()).unwrap();
        assert_eq!((pc.full_adders, pc.half_adders), (15, 0));
        let opt = SortingNetwork::bundled_optimal(8).unwrap();
        let t = dendrite_gates(DendriteKind::TopkPc, 8, Some(2), Some(&opt), &w()).unwrap();
        assert_eq!((t.logic_gates(), t.full_adders), (22, 1));
        assert_eq!(t.total_ge, t.recompute(&w()));
        assert!(matches!(
            dendrite_gates(DendriteKind::TopkPc, 8, Some(2), None, &w()),
            Err(CostError::MissingSource(_))
        ));
    }

    #[test]
    fn full_width_top_k_is_sorter_plus_counter() {
        let net = SortingNetwork::bundled_optimal(8).unwrap();
        let t = dendrite_gates(DendriteKind::TopkPc, 8, Some(8), Some(&net), &w()).unwrap();
        let s = dendrite_gates(DendriteKind::SortingPc, 8, Some(8), Some(&net), &w()).unwrap();
        assert_eq!(t.total_ge, s.total_ge);
        assert_eq!(t.full_adders, 7);
        let pc = dendrite_gates(DendriteKind::PcCompact, 8, None, None, &w()).unwrap();
        assert!(t.total_ge >= pc.total_ge);
    }

    #[test]
    fn ranking_is_sorted_and_complete() {
        let opt = SortingNetwork::bundled_optimal(16).unwrap();
        let rows = rank_designs(16, 2, &[("optimal", &opt)], &w()).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.windows(2).all(|p| p[0].total_ge <= p[1].total_ge));
        assert_eq!(rows[0].design, "topk-pc/optimal");
        let plot = plot_rows(&rows);
        assert!(plot.starts_with("n,k,design,ge\n16,2,topk-pc/optimal,"));
    }

    #[test]
    fn soma_is_design_independent() {
        let a = NeuronConfig::new(vec![1; 8], 3, DendriteKind::PcCompact, None);
        let b = a.with_dendrite(DendriteKind::TopkPc, Some(2));
        assert_eq!(soma_estimate(&a, &w()), soma_estimate(&b, &w()));
    }
}
