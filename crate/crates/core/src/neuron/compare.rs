// SPDX-License-Identifier: Apache-2.0
//! Volley-by-volley comparison of two dendrite designs on the same neuron.

use serde::Serialize;

use super::{volley::active_profile, Neuron, NeuronConfig, NeuronError, SpikeVolley};
use crate::neuron::DendriteKind;
use crate::sortnet::SortingNetwork;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VolleyRecord {
    pub volley: usize,
    pub base_fire: Option<u32>,
    pub alt_fire: Option<u32>,
    pub fire_match: bool,
    pub trace_match: bool,
    /// Largest number of synapses pulsing in one cycle.
    pub max_active: u32,
    pub dropped_spikes: u32,
    /// Alternative trace never above the baseline and never fires earlier.
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub base: DendriteKind,
    pub alt: DendriteKind,
    /// Smallest `k` of the two designs, if either truncates.
    pub k: Option<usize>,
    pub volleys: usize,
    pub fire_matches: usize,
    pub trace_matches: usize,
    pub fire_match_rate: f64,
    pub trace_match_rate: f64,
    /// Volleys whose busiest cycle stays within `k`.
    pub sparse_volleys: usize,
    /// Every sparse volley produced identical traces and fire times.
    pub implication_holds: bool,
    pub ordering_violations: usize,
    pub dropped_spikes: u64,
    pub records: Vec<VolleyRecord>,
}

impl EquivalenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// One row per volley.
    pub fn records_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r).expect("in-memory CSV write");
        }
        String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
    }
}

fn rate(hits: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        hits as f64 / total as f64
    }
}

pub fn compare_designs(
    base: &NeuronConfig,
    alt: &NeuronConfig,
    volleys: &[SpikeVolley],
) -> Result<EquivalenceReport, NeuronError> {
    compare(base, alt, volleys, None)
}

/// [`compare_designs`] with `source` as the sorter behind any sorting or
/// top-k dendrite.
pub fn compare_designs_with_source(
    base: &NeuronConfig,
    alt: &NeuronConfig,
    volleys: &[SpikeVolley],
    source: &SortingNetwork,
) -> Result<EquivalenceReport, NeuronError> {
    compare(base, alt, volleys, Some(source))
}

fn compare(
    base: &NeuronConfig,
    alt: &NeuronConfig,
    volleys: &[SpikeVolley],
    source: Option<&SortingNetwork>,
) -> Result<EquivalenceReport, NeuronError> {
    let same_neuron = base.n == alt.n
        && base.weights == alt.weights
        && base.threshold == alt.threshold
        && base.with_dendrite(alt.dendrite, alt.k) == *alt;
    if !same_neuron {
        return Err(NeuronError::Incomparable(
            "configurations differ in more than the dendrite kind and k".into(),
        ));
    }
    let (nb, na) = (
        Neuron::with_source(base.clone(), source)?,
        Neuron::with_source(alt.clone(), source)?,
    );
    let k = [nb.dendrite().k(), na.dendrite().k()]
        .into_iter()
        .flatten()
        .min();
    let limit = k.map_or(u32::MAX, |k| k as u32);

    let mut records = Vec::with_capacity(volleys.len());
    for (i, v) in volleys.iter().enumerate() {
        let rb = nb.simulate(v)?;
        let ra = na.simulate(v)?;
        let max_active = active_profile(&base.weights, v, base.cycles())
            .into_iter()
            .max()
            .unwrap_or(0);
        let not_earlier = match (rb.fire_time, ra.fire_time) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(b), Some(a)) => a >= b,
        };
        records.push(VolleyRecord {
            volley: i,
            base_fire: rb.fire_time,
            alt_fire: ra.fire_time,
            fire_match: rb.fire_time == ra.fire_time,
            trace_match: rb.trace == ra.trace,
            max_active,
            dropped_spikes: ra.dropped_spikes,
            ordered: not_earlier && ra.trace.iter().zip(&rb.trace).all(|(a, b)| a <= b),
        });
    }

    let fire_matches = records.iter().filter(|r| r.fire_match).count();
    let trace_matches = records.iter().filter(|r| r.trace_match).count();
    let sparse: Vec<&VolleyRecord> = records.iter().filter(|r| r.max_active <= limit).collect();
    Ok(EquivalenceReport {
        base: base.dendrite,
        alt: alt.dendrite,
        k,
        volleys: records.len(),
        fire_matches,
        trace_matches,
        fire_match_rate: rate(fire_matches, records.len()),
        trace_match_rate: rate(trace_matches, records.len()),
        sparse_volleys: sparse.len(),
        implication_holds: sparse.iter().all(|r| r.fire_match && r.trace_match),
        ordering_violations: records.iter().filter(|r| !r.ordered).count(),
        dropped_spikes: records.iter().map(|r| r.dropped_spikes as u64).sum(),
        records,
    })
}
