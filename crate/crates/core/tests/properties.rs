// SPDX-License-Identifier: Apache-2.0
//! Invariants checked over random inputs, plus a few exhaustive sweeps.

use proptest::prelude::*;
use unary_topk::cost::{dendrite_gates, selector_gates, CellWeights};
use unary_topk::emit::{emit_dendrite, Netlist};
use unary_topk::neuron::{default_source, Dendrite, VolleyGenerator};
use unary_topk::sortnet::load_network;
use unary_topk::topk::{eval_topk, eval_topk_temporal, is_subsequence, load_selector, DeadWire};
use unary_topk::{
    compare_designs, gen_bitonic, prune_topk, rnl_response, simulate_neuron, BitVector,
    DendriteKind, NeuronConfig, SortingNetwork, SpikeVolley, TemporalStream,
};

fn sources() -> Vec<SortingNetwork> {
    let mut v: Vec<SortingNetwork> = [4, 8, 16, 32, 64]
        .map(|n| SortingNetwork::bundled_optimal(n).unwrap())
        .into();
    v.extend([2, 4, 8, 16, 32, 64].map(|n| gen_bitonic(n).unwrap()));
    v
}

/// A source network, a `k` for it and an input word.
fn selector_case() -> impl Strategy<Value = (SortingNetwork, usize, u64)> {
    (0..11usize, any::<prop::sample::Index>(), any::<u64>()).prop_map(|(i, k, bits)| {
        let net = sources().swap_remove(i);
        let k = k.index(net.width()) + 1;
        (net, k, bits)
    })
}

fn top_ones(ones: u32, k: usize) -> u64 {
    let m = ones.min(k as u32);
    ((1u64 << m) - 1) << (k as u32 - m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn selector_matches_full_sort((net, k, bits) in selector_case()) {
        let n = net.width();
        let x = BitVector::from_bits(n, bits).unwrap();
        let sel = prune_topk(&net, k).unwrap();
        let got = eval_topk(&sel, &x).unwrap();
        prop_assert_eq!(got, net.eval_bits(&x).unwrap().slice(n - k, k));
        prop_assert_eq!(got.bits(), top_ones(x.count_ones(), k));
        prop_assert_eq!(got, sel.eval_with_dead(&x, DeadWire::One).unwrap());
    }

    #[test]
    fn pruned_units_are_an_ordered_subset((net, k, _b) in selector_case()) {
        let sel = prune_topk(&net, k).unwrap();
        prop_assert!(is_subsequence(sel.mandatory(), net.units()));
        if k < net.width() {
            let wider = prune_topk(&net, k + 1).unwrap();
            prop_assert!(sel.mandatory().len() <= wider.mandatory().len());
            let w = CellWeights::default();
            prop_assert!(selector_gates(&sel, &w).total_ge <= selector_gates(&wider, &w).total_ge);
        } else {
            prop_assert_eq!(sel.mandatory().len(), net.len());
            prop_assert!(sel.half_units().is_empty());
        }
    }

    #[test]
    fn selector_text_roundtrips((net, k, _b) in selector_case()) {
        let sel = prune_topk(&net, k).unwrap();
        let text = sel.to_text();
        let back = load_selector(&text).unwrap();
        prop_assert_eq!(back.counts(), sel.counts());
        prop_assert_eq!(back.to_text(), text);
        let reloaded = load_network(&net.to_text()).unwrap();
        prop_assert_eq!(reloaded.units(), net.units());
    }

    #[test]
    fn temporal_selection_truncates_per_cycle(
        (net, k, _b) in selector_case(),
        cycles in proptest::collection::vec(any::<u64>(), 1..12),
    ) {
        let n = net.width();
        let slices: Vec<BitVector> = cycles.iter().map(|&b| BitVector::from_bits(n, b).unwrap()).collect();
        let stream = TemporalStream::from_cycles(n, &slices).unwrap();
        let out = eval_topk_temporal(&prune_topk(&net, k).unwrap(), &stream).unwrap();
        prop_assert_eq!(out.width(), k);
        for (t, x) in slices.iter().enumerate() {
            prop_assert_eq!(out.cycle(t).count_ones(), x.count_ones().min(k as u32));
        }
    }

    #[test]
    fn netlists_match_dendrites(kind in 0..4usize, n in 1..=64usize, k in 1..=8usize, inputs in proptest::collection::vec(any::<u64>(), 16)) {
        let kind = DendriteKind::ALL[kind];
        let k = kind.needs_k().then_some(k.min(n));
        let src = kind.needs_k().then(|| default_source(kind, n).unwrap());
        let nl = emit_dendrite(kind, n, k, src.as_ref()).unwrap();
        let report = dendrite_gates(kind, n, k, src.as_ref(), &CellWeights::default()).unwrap();
        prop_assert!(nl.counts().matches(&report));
        prop_assert_eq!(report.total_ge, report.recompute(&CellWeights::default()));
        let compiled = Netlist::parse(&nl.to_text()).unwrap().compile().unwrap();
        let d = Dendrite::build(kind, n, k, src.as_ref()).unwrap();
        for bits in inputs {
            let x = BitVector::from_bits(n, bits).unwrap();
            let want = d.increment(&x).unwrap();
            prop_assert_eq!(compiled.eval(x.bits()), want as u64);
            prop_assert_eq!(want, x.count_ones().min(k.map_or(u32::MAX, |k| k as u32)));
        }
    }
}

fn spikes(n: usize) -> impl Strategy<Value = Vec<Option<u32>>> {
    proptest::collection::vec(proptest::option::weighted(0.4, 0u32..8), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn potential_is_sum_of_responses(
        (weights, times) in (1..=24usize).prop_flat_map(|n| (proptest::collection::vec(0u32..=7, n), spikes(n))),
        conventional in any::<bool>(),
    ) {
        let kind = if conventional { DendriteKind::PcConventional } else { DendriteKind::PcCompact };
        let mut cfg = NeuronConfig::new(weights.clone(), 1000, kind, None);
        cfg.acc_bits = 12;
        let r = simulate_neuron(&cfg, &SpikeVolley::from_times(times.clone())).unwrap();
        for (t, &p) in r.trace.iter().enumerate() {
            let sum: i64 = weights
                .iter()
                .zip(&times)
                .filter_map(|(&w, s)| s.map(|s| rnl_response(w as i64, t as i64 - s as i64).unwrap()))
                .sum();
            prop_assert_eq!(p as i64, sum);
        }
    }

    #[test]
    fn axon_is_one_pulse(
        (weights, times) in (1..=16usize).prop_flat_map(|n| (proptest::collection::vec(0u32..=7, n), spikes(n))),
        threshold in 0u32..=31,
        pulse_len in 1u32..=12,
    ) {
        let mut cfg = NeuronConfig::new(weights, threshold, DendriteKind::TopkPc, Some(1));
        cfg.pulse_len = pulse_len;
        let r = simulate_neuron(&cfg, &SpikeVolley::from_times(times)).unwrap();
        let ones: Vec<usize> = r.axon.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        match r.fire_time {
            None => prop_assert!(ones.is_empty()),
            Some(t) => {
                let t = t as usize;
                prop_assert_eq!(ones, (t..t + pulse_len as usize).collect::<Vec<_>>());
                prop_assert!(r.trace[t] >= threshold);
                prop_assert!(t == 0 || r.trace[t - 1] < threshold);
            }
        }
        prop_assert!(r.trace.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn truncation_never_helps(n_pick in 0..3usize, seed in any::<u64>(), density in 0.0f64..0.9, threshold in 1u32..=31, k in 1usize..=4) {
        let n = [16, 32, 64][n_pick];
        let weights: Vec<u32> = (0..n).map(|i| ((seed >> (i % 60)) & 7) as u32).collect();
        let base = NeuronConfig::new(weights, threshold, DendriteKind::PcCompact, None);
        let alt = base.with_dendrite(DendriteKind::TopkPc, Some(k));
        let vs = VolleyGenerator::new(n, density, seed).unwrap().generate(8);
        let r = compare_designs(&base, &alt, &vs).unwrap();
        prop_assert_eq!(r.ordering_violations, 0);
        prop_assert!(r.implication_holds);
    }

    #[test]
    fn sparse_volleys_are_unaffected(n_pick in 0..3usize, seed in any::<u64>(), density in 0.0f64..1.0, threshold in 1u32..=31, k in 1usize..=4) {
        let n = [16, 32, 64][n_pick];
        let weights: Vec<u32> = (0..n).map(|i| ((seed >> (i % 60)) & 7) as u32).collect();
        let base = NeuronConfig::new(weights.clone(), threshold, DendriteKind::PcConventional, None);
        let alt = base.with_dendrite(DendriteKind::SortingPc, Some(k));
        let mut g = VolleyGenerator::new(n, density, seed).unwrap();
        let vs: Vec<SpikeVolley> = (0..8).map(|_| g.next_bounded(&weights, k as u32)).collect();
        let r = compare_designs(&base, &alt, &vs).unwrap();
        prop_assert_eq!(r.trace_matches, vs.len());
        prop_assert_eq!(r.fire_matches, vs.len());
    }

    #[test]
    fn volley_files_roundtrip(times in (1..=64usize).prop_flat_map(spikes)) {
        let v = SpikeVolley::from_times(times);
        prop_assert_eq!(&SpikeVolley::parse(&v.to_json(), v.width()).unwrap(), &v);
        prop_assert_eq!(&SpikeVolley::parse(&v.to_csv(), v.width()).unwrap(), &v);
    }
}

#[test]
fn exhaustive_truncation_law_n16() {
    for net in [
        SortingNetwork::bundled_optimal(16).unwrap(),
        gen_bitonic(16).unwrap(),
    ] {
        for k in [1, 2, 3, 8, 16] {
            let sel = prune_topk(&net, k).unwrap();
            for v in 0..1u64 << 16 {
                let x = BitVector::from_bits(16, v).unwrap();
                assert_eq!(
                    eval_topk(&sel, &x).unwrap().bits(),
                    top_ones(v.count_ones(), k),
                    "k={k} v={v:016b}"
                );
            }
        }
    }
}

#[test]
fn counters_agree_exhaustively_n16() {
    let conv = Dendrite::build(DendriteKind::PcConventional, 16, None, None).unwrap();
    let compact = Dendrite::build(DendriteKind::PcCompact, 16, None, None).unwrap();
    for v in 0..1u64 << 16 {
        let x = BitVector::from_bits(16, v).unwrap();
        let (a, b) = (conv.increment(&x).unwrap(), compact.increment(&x).unwrap());
        assert_eq!((a, b), (v.count_ones(), v.count_ones()));
    }
}
