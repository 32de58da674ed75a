// SPDX-License-Identifier: Apache-2.0
//! Flat structural netlists.
//!
//! Text format, one item per line:
//!
//! ```text
//! # free-form header
//! input x0
//! output y0 <net>
//! AND2 <out> <a> <b>
//! OR2 <out> <a> <b>
//! HA <sum> <carry> <a> <b>
//! FA <sum> <carry> <a> <b> <cin>
//! CONST0 <out>
//! ```
//!
//! Cells appear in topological order, but the parser does not rely on it.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cost::{CostError, GateReport};
use crate::counter::{AdderCell, CounterKind, ParallelCounter};
use crate::neuron::DendriteKind;
use crate::sortnet::SortingNetwork;
use crate::topk::{prune_topk, Gate, TopKSelector};

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("net {0:?} has more than one driver")]
    MultipleDrivers(String),
    #[error("net {0:?} is read but never driven")]
    Undriven(String),
    #[error("combinational cycle through net {0:?}")]
    Cycle(String),
    #[error(transparent)]
    Design(#[from] CostError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellType {
    And2,
    Or2,
    Ha,
    Fa,
    Const0,
}

impl CellType {
    pub fn name(self) -> &'static str {
        match self {
            CellType::And2 => "AND2",
            CellType::Or2 => "OR2",
            CellType::Ha => "HA",
            CellType::Fa => "FA",
            CellType::Const0 => "CONST0",
        }
    }

    /// (outputs, inputs)
    pub fn arity(self) -> (usize, usize) {
        match self {
            CellType::And2 | CellType::Or2 => (1, 2),
            CellType::Ha => (2, 2),
            CellType::Fa => (2, 3),
            CellType::Const0 => (1, 0),
        }
    }
}

impl FromStr for CellType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            CellType::And2,
            CellType::Or2,
            CellType::Ha,
            CellType::Fa,
            CellType::Const0,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| format!("unknown cell type {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub kind: CellType,
    pub outputs: Vec<String>,
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CellCounts {
    pub and2: u32,
    pub or2: u32,
    pub ha: u32,
    pub fa: u32,
    pub const0: u32,
}

impl CellCounts {
    /// Logic-cell counts agree with a cost report.
    pub fn matches(&self, r: &GateReport) -> bool {
        (self.and2, self.or2, self.ha, self.fa) == (r.and2, r.or2, r.half_adders, r.full_adders)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Netlist {
    pub header: Vec<String>,
    pub inputs: Vec<String>,
    /// `(port, driving net)`, in output bit order.
    pub outputs: Vec<(String, String)>,
    pub cells: Vec<Cell>,
}

impl Netlist {
    fn with_inputs(header: String, n: usize) -> Self {
        Netlist {
            header: vec![header],
            inputs: (0..n).map(|i| format!("x{i}")).collect(),
            ..Default::default()
        }
    }

    fn cell(&mut self, kind: CellType, outputs: &[&str], inputs: &[&str]) {
        self.cells.push(Cell {
            kind,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
        });
    }

    fn set_outputs(&mut self, nets: Vec<String>) {
        self.outputs = nets
            .into_iter()
            .enumerate()
            .map(|(i, net)| (format!("y{i}"), net))
            .collect();
    }

    pub fn counts(&self) -> CellCounts {
        let mut c = CellCounts::default();
        for cell in &self.cells {
            match cell.kind {
                CellType::And2 => c.and2 += 1,
                CellType::Or2 => c.or2 += 1,
                CellType::Ha => c.ha += 1,
                CellType::Fa => c.fa += 1,
                CellType::Const0 => c.const0 += 1,
            }
        }
        c
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, EmitError> {
        let mut nl = Netlist::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: String| EmitError::Parse { line, msg };
            let trimmed = raw.trim();
            if let Some(h) = trimmed.strip_prefix('#') {
                nl.header.push(h.trim().to_string());
                continue;
            }
            let tok: Vec<&str> = trimmed.split_whitespace().collect();
            match tok.as_slice() {
                [] => {}
                ["input", net] => nl.inputs.push(net.to_string()),
                ["output", port, net] => nl.outputs.push((port.to_string(), net.to_string())),
                [ty, rest @ ..] => {
                    let kind: CellType = ty.parse().map_err(err)?;
                    let (o, i) = kind.arity();
                    if rest.len() != o + i {
                        return Err(err(format!(
                            "{} takes {} nets, got {}",
                            kind.name(),
                            o + i,
                            rest.len()
                        )));
                    }
                    nl.cell(kind, &rest[..o], &rest[o..]);
                }
            }
        }
        nl.compile()?;
        Ok(nl)
    }

    /// Resolve nets to slots and order cells so every input is computed
    /// before it is read.
    pub fn compile(&self) -> Result<CompiledNetlist, EmitError> {
        let mut slot: HashMap<&str, usize> = HashMap::new();
        let mut driver: Vec<Option<usize>> = Vec::new();
        for net in &self.inputs {
            if slot.insert(net, slot.len()).is_some() {
                return Err(EmitError::MultipleDrivers(net.clone()));
            }
            driver.push(None);
        }
        for (c, cell) in self.cells.iter().enumerate() {
            for net in &cell.outputs {
                if slot.insert(net, slot.len()).is_some() {
                    return Err(EmitError::MultipleDrivers(net.clone()));
                }
                driver.push(Some(c));
            }
        }
        let lookup = |net: &String| {
            slot.get(net.as_str())
                .copied()
                .ok_or_else(|| EmitError::Undriven(net.clone()))
        };

        // Depth-first topological order over cells.
        let mut order = Vec::with_capacity(self.cells.len());
        let mut state = vec![0u8; self.cells.len()];
        for root in 0..self.cells.len() {
            let mut stack = vec![(root, 0usize)];
            while let Some(&mut (c, ref mut next)) = stack.last_mut() {
                if *next == 0 {
                    if state[c] == 2 {
                        stack.pop();
                        continue;
                    }
                    state[c] = 1;
                }
                if let Some(net) = self.cells[c].inputs.get(*next) {
                    *next += 1;
                    if let Some(d) = driver[lookup(net)?] {
                        match state[d] {
                            0 => stack.push((d, 0)),
                            1 => return Err(EmitError::Cycle(net.clone())),
                            _ => {}
                        }
                    }
                } else {
                    state[c] = 2;
                    order.push(c);
                    stack.pop();
                }
            }
        }

        let ops = order
            .into_iter()
            .map(|c| {
                let cell = &self.cells[c];
                Ok(Op {
                    kind: cell.kind,
                    ins: cell.inputs.iter().map(lookup).collect::<Result<_, _>>()?,
                    outs: cell.outputs.iter().map(lookup).collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<Vec<_>, EmitError>>()?;
        let outputs = self
            .outputs
            .iter()
            .map(|(_, net)| lookup(net))
            .collect::<Result<_, _>>()?;
        Ok(CompiledNetlist {
            inputs: self.inputs.len(),
            nets: slot.len(),
            ops,
            outputs,
        })
    }

    /// Evaluate once; bit `i` of `bits` drives input `i`, bit `j` of the
    /// result is output `j`.
    pub fn eval(&self, bits: u64) -> Result<u64, EmitError> {
        Ok(self.compile()?.eval(bits))
    }

    /// Nets driven by `CONST0` that no cell or output reads.
    pub fn unread_constants(&self) -> Vec<&str> {
        self.cells
            .iter()
            .filter(|c| c.kind == CellType::Const0)
            .map(|c| c.outputs[0].as_str())
            .filter(|net| {
                !self.cells.iter().any(|c| c.inputs.iter().any(|i| i == net))
                    && !self.outputs.iter().any(|(_, o)| o == net)
            })
            .collect()
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for h in &self.header {
            writeln!(f, "# {h}")?;
        }
        for i in &self.inputs {
            writeln!(f, "input {i}")?;
        }
        for (port, net) in &self.outputs {
            writeln!(f, "output {port} {net}")?;
        }
        for c in &self.cells {
            write!(f, "{}", c.kind.name())?;
            for net in c.outputs.iter().chain(&c.inputs) {
                write!(f, " {net}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Op {
    kind: CellType,
    ins: Vec<usize>,
    outs: Vec<usize>,
}

/// A netlist resolved to slot indices for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledNetlist {
    inputs: usize,
    nets: usize,
    ops: Vec<Op>,
    outputs: Vec<usize>,
}

impl CompiledNetlist {
    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn eval(&self, bits: u64) -> u64 {
        let mut v = vec![false; self.nets];
        for (i, slot) in v.iter_mut().enumerate().take(self.inputs) {
            *slot = (bits >> i) & 1 == 1;
        }
        for op in &self.ops {
            let a = |i: usize| v[op.ins[i]];
            match op.kind {
                CellType::And2 => v[op.outs[0]] = a(0) & a(1),
                CellType::Or2 => v[op.outs[0]] = a(0) | a(1),
                CellType::Ha => {
                    let (s, c) = (a(0) ^ a(1), a(0) & a(1));
                    v[op.outs[0]] = s;
                    v[op.outs[1]] = c;
                }
                CellType::Fa => {
                    let (x, y, z) = (a(0), a(1), a(2));
                    v[op.outs[0]] = x ^ y ^ z;
                    v[op.outs[1]] = (x & y) | (z & (x ^ y));
                }
                CellType::Const0 => v[op.outs[0]] = false,
            }
        }
        self.outputs
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &s)| acc | ((v[s] as u64) << j))
    }
}

/// Current net on each wire while laying out compare-and-swap units.
struct WireNets(Vec<String>);

impl WireNets {
    fn inputs(width: usize, n: usize, nl: &mut Netlist) -> Self {
        if width > n {
            nl.cell(CellType::Const0, &["pad"], &[]);
        }
        WireNets(
            (0..width)
                .map(|i| if i < n { format!("x{i}") } else { "pad".into() })
                .collect(),
        )
    }

    /// Lay out one unit; `removed` names the gate whose output is left dead.
    fn unit(&mut self, nl: &mut Netlist, p: usize, i: usize, j: usize, removed: Option<Gate>) {
        let (lo, hi) = (format!("u{p}l"), format!("u{p}h"));
        let (a, b) = (self.0[i].clone(), self.0[j].clone());
        match removed {
            Some(Gate::And) => nl.cell(CellType::Const0, &[&lo], &[]),
            _ => nl.cell(CellType::And2, &[&lo], &[&a, &b]),
        }
        match removed {
            Some(Gate::Or) => nl.cell(CellType::Const0, &[&hi], &[]),
            _ => nl.cell(CellType::Or2, &[&hi], &[&a, &b]),
        }
        self.0[i] = lo;
        self.0[j] = hi;
    }
}

fn lay_selector(nl: &mut Netlist, sel: &TopKSelector, n: usize) -> Vec<String> {
    let mut w = WireNets::inputs(sel.width(), n, nl);
    for (p, u) in sel.mandatory().iter().enumerate() {
        let removed = sel
            .half_units()
            .iter()
            .find(|h| h.position == p)
            .map(|h| sel.removed_gate(h));
        w.unit(nl, p, u.i, u.j, removed);
    }
    w.0[sel.output_wires()].to_vec()
}

fn lay_counter(nl: &mut Netlist, pc: &ParallelCounter, ins: &[String]) -> Vec<String> {
    let name = |id: usize| -> String {
        if id < ins.len() {
            ins[id].clone()
        } else if id == pc.zero_net() {
            "zero".into()
        } else {
            format!("c{id}")
        }
    };
    if pc.uses_zero() {
        nl.cell(CellType::Const0, &["zero"], &[]);
    }
    for cell in pc.cells() {
        match *cell {
            AdderCell::Half { a, b, sum, carry } => nl.cell(
                CellType::Ha,
                &[&name(sum), &name(carry)],
                &[&name(a), &name(b)],
            ),
            AdderCell::Full {
                a,
                b,
                cin,
                sum,
                carry,
            } => nl.cell(
                CellType::Fa,
                &[&name(sum), &name(carry)],
                &[&name(a), &name(b), &name(cin)],
            ),
        }
    }
    pc.outputs().iter().map(|&id| name(id)).collect()
}

/// Netlist of a selector alone; output `y<i>` is wire `n-k+i`.
pub fn emit_selector(sel: &TopKSelector) -> Netlist {
    let c = sel.counts();
    let mut nl = Netlist::with_inputs(
        format!(
            "top-k selector n={} k={} total/mandatory/half={c}",
            sel.width(),
            sel.k()
        ),
        sel.width(),
    );
    let outs = lay_selector(&mut nl, sel, sel.width());
    nl.set_outputs(outs);
    nl
}

/// Netlist of a complete dendrite; outputs are the increment bits, least
/// significant first.
pub fn emit_dendrite(
    kind: DendriteKind,
    n: usize,
    k: Option<usize>,
    source: Option<&SortingNetwork>,
) -> Result<Netlist, EmitError> {
    let mut nl = Netlist::with_inputs(
        format!(
            "{kind} dendrite n={n}{}",
            k.map(|k| format!(" k={k}")).unwrap_or_default()
        ),
        n,
    );
    let inputs: Vec<String> = nl.inputs.clone();
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
    let outs = match kind {
        DendriteKind::PcCompact => lay_counter(
            &mut nl,
            &ParallelCounter::new(CounterKind::Compact, n),
            &inputs,
        ),
        DendriteKind::PcConventional => lay_counter(
            &mut nl,
            &ParallelCounter::new(CounterKind::AdderTree, n),
            &inputs,
        ),
        DendriteKind::SortingPc => {
            let (net, k) = sorter()?;
            let mut w = WireNets::inputs(net.width(), n, &mut nl);
            for (p, u) in net.units().iter().enumerate() {
                w.unit(&mut nl, p, u.i, u.j, None);
            }
            let top = w.0[net.width() - k..].to_vec();
            lay_counter(
                &mut nl,
                &ParallelCounter::new(CounterKind::Compact, k),
                &top,
            )
        }
        DendriteKind::TopkPc => {
            let (net, k) = sorter()?;
            let sel = prune_topk(net, k).map_err(CostError::from)?;
            let top = lay_selector(&mut nl, &sel, n);
            lay_counter(
                &mut nl,
                &ParallelCounter::new(CounterKind::Compact, k),
                &top,
            )
        }
    };
    nl.set_outputs(outs);
    Ok(nl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVector;
    use crate::cost::{dendrite_gates, selector_gates, CellWeights};
    use crate::neuron::Dendrite;
    use crate::sortnet::gen_bitonic;
    use crate::topk::eval_topk;

    #[test]
    fn single_unit_is_two_cells() {
        let net = SortingNetwork::from_pairs(2, &[(0, 1)]).unwrap();
        let nl = emit_selector(&prune_topk(&net, 2).unwrap());
        let c = nl.counts();
        assert_eq!((c.and2, c.or2, c.const0), (1, 1, 0));
    }

    #[test]
    fn selector_netlists_match_direct_eval_n8() {
        for net in [
            SortingNetwork::bundled_optimal(8).unwrap(),
            gen_bitonic(8).unwrap(),
        ] {
            for k in 1..=8 {
                let sel = prune_topk(&net, k).unwrap();
                let nl = Netlist::parse(&emit_selector(&sel).to_text()).unwrap();
                assert!(nl
                    .counts()
                    .matches(&selector_gates(&sel, &CellWeights::default())));
                assert_eq!(nl.counts().const0 as usize, sel.half_units().len());
                assert_eq!(nl.unread_constants().len(), sel.half_units().len());
                let c = nl.compile().unwrap();
                for v in 0..256u64 {
                    let direct = eval_topk(&sel, &BitVector::from_bits(8, v).unwrap()).unwrap();
                    assert_eq!(c.eval(v), direct.bits(), "k={k} v={v:08b}");
                }
            }
        }
    }

    #[test]
    fn optimal8_k2_has_22_logic_cells() {
        let sel = prune_topk(&SortingNetwork::bundled_optimal(8).unwrap(), 2).unwrap();
        let c = emit_selector(&sel).counts();
        assert_eq!(c.and2 + c.or2, 22);
    }

    #[test]
    fn dendrite_netlists_match_for_odd_widths() {
        for n in [5usize, 8, 10] {
            for kind in DendriteKind::ALL {
                let k = kind.needs_k().then_some(2);
                let src = crate::neuron::default_source(kind, n).unwrap();
                let nl = emit_dendrite(kind, n, k, Some(&src)).unwrap();
                let d = Dendrite::build(kind, n, k, Some(&src)).unwrap();
                let r = dendrite_gates(kind, n, k, Some(&src), &CellWeights::default()).unwrap();
                assert!(nl.counts().matches(&r), "{kind} n={n}");
                let c = Netlist::parse(&nl.to_text()).unwrap().compile().unwrap();
                for v in 0..(1u64 << n) {
                    let want = d.increment(&BitVector::from_bits(n, v).unwrap()).unwrap() as u64;
                    assert_eq!(c.eval(v), want, "{kind} n={n} v={v:b}");
                }
            }
        }
    }

    #[test]
    fn parser_rejects_malformed() {
        assert!(matches!(
            Netlist::parse("XOR2 a b c"),
            Err(EmitError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Netlist::parse("input a\nAND2 o a"),
            Err(EmitError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Netlist::parse("input a\nAND2 o a q"),
            Err(EmitError::Undriven(_))
        ));
        assert!(matches!(
            Netlist::parse("input a\nAND2 a a a"),
            Err(EmitError::MultipleDrivers(_))
        ));
        assert!(matches!(
            Netlist::parse("input a\nAND2 p a q\nOR2 q a p"),
            Err(EmitError::Cycle(_))
        ));
    }

    #[test]
    fn missing_source_is_an_error() {
        assert!(matches!(
            emit_dendrite(DendriteKind::TopkPc, 8, Some(2), None),
            Err(EmitError::Design(CostError::MissingSource(_)))
        ));
    }
}
