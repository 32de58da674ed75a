// SPDX-License-Identifier: Apache-2.0
//! Unary sorting networks, top-k selectors pruned from them, and a
//! cycle-accurate model of ramp-no-leak neurons whose dendrite is built
//! from those selectors.
//!
//! The crate is organised bottom-up:
//!
//! * [`bits`] holds the per-cycle [`BitVector`] and multi-cycle [`TemporalStream`].
//! * [`sortnet`] builds, parses, evaluates and validates compare-and-swap networks.
//! * [`topk`] prunes a sorter into a top-k selector and classifies half units.
//! * [`counter`] holds the structural parallel counters (popcount circuits).
//! * [`neuron`] simulates SRM0 neurons with a ramp-no-leak response.
//! * [`cost`] turns designs into gate-equivalent reports.
//! * [`emit`] writes and interprets flat structural netlists.
//! * [`cli`] wires the above into the `unary-topk` command.
//!
//! Orientation is fixed crate-wide: a compare-and-swap unit `(i, j)` with
//! `i < j` drives `AND` onto wire `i` and `OR` onto wire `j`, so ones sink
//! towards high wire indices and the top-k outputs are wires `n-k..n`.

pub mod bits;
pub mod cli;
pub mod cost;
pub mod counter;
pub mod emit;
pub mod neuron;
pub mod sortnet;
pub mod topk;

pub use bits::{BitVector, StreamError, TemporalStream, MAX_WIDTH};
pub use cost::{CellWeights, GateReport};
pub use counter::{CounterKind, ParallelCounter};
pub use emit::Netlist;
pub use neuron::{
    compare_designs, rnl_response, simulate_neuron, synapse_pulse, Dendrite, DendriteKind,
    EquivalenceReport, Neuron, NeuronConfig, NeuronError, SimResult, SpikeVolley,
};
pub use sortnet::{
    gen_bitonic, validate_sorter, CompareSwap, NetworkError, Origin, SortingNetwork,
    ValidationBudget, ValidationReport,
};
pub use topk::{prune_topk, HalfUnit, SelectorCounts, SelectorError, TopKSelector};
