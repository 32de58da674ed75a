// SPDX-License-Identifier: Apache-2.0
//! Bit-serial SRM0 neuron with a ramp-no-leak (RNL) response.
//!
//! Each synapse turns an input spike at cycle `s` into a pulse of `w` ones
//! starting at `s`. Every cycle the dendrite reduces the pulse slice to an
//! increment, the soma adds it into a saturating `B`-bit register, and the
//! axon emits a `P`-cycle pulse the first time the register reaches the
//! threshold.
//!
//! The recorded trace is the integrated register value for every simulated
//! cycle. Firing latches: the axon pulse and `fire_time` follow the first
//! threshold crossing and no second spike is produced in the same volley.

mod compare;
mod dendrite;
mod volley;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{BitVector, StreamError};
use crate::sortnet::{NetworkError, SortingNetwork};
use crate::topk::SelectorError;

pub use compare::{compare_designs, compare_designs_with_source, EquivalenceReport, VolleyRecord};
pub use dendrite::{default_source, dendrite_increment, Dendrite, DendriteKind};
pub use volley::{
    active_profile, parse_volley_set, volley_set_to_csv, SpikeVolley, TimeDistribution,
    VolleyGenerator,
};

#[derive(Debug, Error)]
pub enum NeuronError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("dendrite kind {0} needs k")]
    MissingK(DendriteKind),
    #[error("negative weight {0}")]
    NegativeWeight(i64),
    #[error("pulse width mismatch: expected {expected}, got {got}")]
    Width { expected: usize, got: usize },
    #[error("volley error: {0}")]
    Volley(String),
    #[error("designs are not comparable: {0}")]
    Incomparable(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Selector(#[from] SelectorError),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// RNL response: `0` before the spike, a ramp of slope one for `w` cycles,
/// then flat at `w`.
pub fn rnl_response(w: i64, t: i64) -> Result<i64, NeuronError> {
    if w < 0 {
        return Err(NeuronError::NegativeWeight(w));
    }
    Ok(if t < 0 { 0 } else { (t + 1).min(w) })
}

/// Synapse output at `cycle`: high for `w` cycles from the spike.
pub fn synapse_pulse(w: u32, spike: Option<u32>, cycle: u32) -> bool {
    spike.is_some_and(|s| cycle >= s && cycle - s < w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FireRule {
    /// Fire once the register is `>= threshold`.
    #[default]
    AtLeast,
    /// Fire once the register is `> threshold`.
    Exceeds,
}

impl FireRule {
    pub fn met(self, potential: u32, threshold: u32) -> bool {
        match self {
            FireRule::AtLeast => potential >= threshold,
            FireRule::Exceeds => potential > threshold,
        }
    }
}

fn default_window() -> u32 {
    8
}
fn default_pulse_len() -> u32 {
    8
}
fn default_acc_bits() -> u32 {
    5
}
fn default_weight_bits() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronConfig {
    pub n: usize,
    pub weights: Vec<u32>,
    pub threshold: u32,
    pub dendrite: DendriteKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Compute window `G`: legal spike times are `0..window`.
    #[serde(default = "default_window")]
    pub window: u32,
    /// Axon pulse length `P`.
    #[serde(default = "default_pulse_len")]
    pub pulse_len: u32,
    /// Membrane register width `B`.
    #[serde(default = "default_acc_bits")]
    pub acc_bits: u32,
    #[serde(default = "default_weight_bits")]
    pub weight_bits: u32,
    #[serde(default)]
    pub fire_rule: FireRule,
}

impl NeuronConfig {
    /// Config with default window, pulse length, register and weight widths.
    pub fn new(
        weights: Vec<u32>,
        threshold: u32,
        dendrite: DendriteKind,
        k: Option<usize>,
    ) -> Self {
        NeuronConfig {
            n: weights.len(),
            weights,
            threshold,
            dendrite,
            k,
            window: default_window(),
            pulse_len: default_pulse_len(),
            acc_bits: default_acc_bits(),
            weight_bits: default_weight_bits(),
            fire_rule: FireRule::default(),
        }
    }

    /// Same neuron with a different dendrite.
    pub fn with_dendrite(&self, dendrite: DendriteKind, k: Option<usize>) -> Self {
        NeuronConfig {
            dendrite,
            k,
            ..self.clone()
        }
    }

    pub fn max_weight(&self) -> u32 {
        (1u32 << self.weight_bits.min(31)) - 1
    }

    pub fn saturation(&self) -> u32 {
        (1u32 << self.acc_bits.min(31)) - 1
    }

    /// Simulated cycles: the window plus the longest possible pulse tail.
    pub fn cycles(&self) -> u32 {
        self.window + self.max_weight()
    }

    pub fn validate(&self) -> Result<(), NeuronError> {
        let bad = |m: String| Err(NeuronError::Config(m));
        if self.weights.len() != self.n {
            return bad(format!(
                "{} weights for {} inputs",
                self.weights.len(),
                self.n
            ));
        }
        if !(1..=16).contains(&self.weight_bits) {
            return bad(format!("weight_bits {} outside 1..=16", self.weight_bits));
        }
        if !(1..=24).contains(&self.acc_bits) {
            return bad(format!("acc_bits {} outside 1..=24", self.acc_bits));
        }
        if let Some((i, w)) = self
            .weights
            .iter()
            .enumerate()
            .find(|(_, &w)| w > self.max_weight())
        {
            return bad(format!(
                "weight {w} on input {i} exceeds {}",
                self.max_weight()
            ));
        }
        if self.threshold > self.saturation() {
            return bad(format!(
                "threshold {} unreachable with a {}-bit register",
                self.threshold, self.acc_bits
            ));
        }
        if self.window == 0 {
            return bad("window must be at least one cycle".into());
        }
        if let Some(k) = self.k {
            if k == 0 || k > self.n {
                return bad(format!("k = {k} out of range 1..={}", self.n));
            }
        }
        if self.dendrite.needs_k() && self.k.is_none() {
            return Err(NeuronError::MissingK(self.dendrite));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimResult {
    pub fire_time: Option<u32>,
    pub trace: Vec<u32>,
    pub increments: Vec<u32>,
    /// Number of pulsing synapses per cycle.
    pub active: Vec<u32>,
    #[serde(serialize_with = "axon_string")]
    pub axon: Vec<bool>,
    /// Pulses discarded by the dendrite, summed over all cycles.
    pub dropped_spikes: u32,
    /// Cycles in which at least one pulse was discarded.
    pub truncated_cycles: u32,
}

fn axon_string<S: serde::Serializer>(axon: &[bool], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(
        &axon
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect::<String>(),
    )
}

impl SimResult {
    pub fn fired(&self) -> bool {
        self.fire_time.is_some()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

impl fmt::Display for SimResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.fire_time {
            Some(t) => write!(f, "fire at t={t}")?,
            None => f.write_str("no fire")?,
        }
        write!(
            f,
            ", trace {:?}, dropped {}",
            self.trace, self.dropped_spikes
        )
    }
}

/// A configured neuron ready to simulate volleys.
#[derive(Debug, Clone)]
pub struct Neuron {
    config: NeuronConfig,
    dendrite: Dendrite,
}

impl Neuron {
    pub fn new(config: NeuronConfig) -> Result<Self, NeuronError> {
        Self::with_source(config, None)
    }

    /// Use `source` as the sorter behind a sorting or top-k dendrite.
    pub fn with_source(
        config: NeuronConfig,
        source: Option<&SortingNetwork>,
    ) -> Result<Self, NeuronError> {
        config.validate()?;
        let dendrite = Dendrite::build(config.dendrite, config.n, config.k, source)?;
        Ok(Neuron { config, dendrite })
    }

    pub fn config(&self) -> &NeuronConfig {
        &self.config
    }

    pub fn dendrite(&self) -> &Dendrite {
        &self.dendrite
    }

    pub fn simulate(&self, volley: &SpikeVolley) -> Result<SimResult, NeuronError> {
        let cfg = &self.config;
        volley.check(cfg.n, cfg.window)?;
        let cycles = cfg.cycles();
        let sat = cfg.saturation();
        let mut potential = 0u32;
        let mut out = SimResult {
            fire_time: None,
            trace: Vec::with_capacity(cycles as usize),
            increments: Vec::with_capacity(cycles as usize),
            active: Vec::with_capacity(cycles as usize),
            axon: vec![false; (cycles + cfg.pulse_len) as usize],
            dropped_spikes: 0,
            truncated_cycles: 0,
        };
        for t in 0..cycles {
            let mut pulses = BitVector::zeros(cfg.n)?;
            for (i, (&w, &s)) in cfg.weights.iter().zip(volley.times()).enumerate() {
                pulses.set(i, synapse_pulse(w, s, t));
            }
            let active = pulses.count_ones();
            let inc = self.dendrite.increment(&pulses)?;
            if inc < active {
                out.dropped_spikes += active - inc;
                out.truncated_cycles += 1;
            }
            potential = (potential + inc).min(sat);
            out.active.push(active);
            out.increments.push(inc);
            out.trace.push(potential);
            if out.fire_time.is_none() && cfg.fire_rule.met(potential, cfg.threshold) {
                out.fire_time = Some(t);
            }
        }
        if let Some(t) = out.fire_time {
            out.axon[t as usize..(t + cfg.pulse_len) as usize].fill(true);
        }
        Ok(out)
    }
}

pub fn simulate_neuron(cfg: &NeuronConfig, volley: &SpikeVolley) -> Result<SimResult, NeuronError> {
    Neuron::new(cfg.clone())?.simulate(volley)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rnl_values() {
        assert_eq!(rnl_response(3, -1).unwrap(), 0);
        assert_eq!(rnl_response(3, 1).unwrap(), 2);
        assert_eq!(rnl_response(3, 9).unwrap(), 3);
        assert_eq!(rnl_response(0, 5).unwrap(), 0);
        assert!(matches!(
            rnl_response(-1, 0),
            Err(NeuronError::NegativeWeight(-1))
        ));
    }

    #[test]
    fn pulse_shape() {
        let s: String = (0..8)
            .map(|t| {
                if synapse_pulse(3, Some(2), t) {
                    '1'
                } else {
                    '0'
                }
            })
            .collect();
        assert_eq!(s, "00111000");
        assert!((0..20).all(|t| !synapse_pulse(7, None, t)));
        assert!((0..20).all(|t| !synapse_pulse(0, Some(4), t)));
    }

    #[test]
    fn hand_summed_fire() {
        let cfg = NeuronConfig::new(vec![3, 3, 0, 0], 4, DendriteKind::PcCompact, None);
        let v = SpikeVolley::from_spikes(4, &[(0, 0), (1, 0)]).unwrap();
        let r = simulate_neuron(&cfg, &v).unwrap();
        assert_eq!(&r.increments[..4], &[2, 2, 2, 0]);
        assert_eq!(r.fire_time, Some(1));
        assert_eq!(&r.trace[..4], &[2, 4, 6, 6]);
        let ones: Vec<usize> = r
            .axon
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(ones, (1..9).collect::<Vec<_>>());
    }

    #[test]
    fn silent_and_zero_threshold() {
        let cfg = NeuronConfig::new(vec![7; 8], 1, DendriteKind::TopkPc, Some(2));
        let r = simulate_neuron(&cfg, &SpikeVolley::silent(8)).unwrap();
        assert_eq!(r.fire_time, None);
        assert!(r.trace.iter().all(|&p| p == 0));
        assert!(r.axon.iter().all(|&b| !b));
        let cfg = NeuronConfig {
            threshold: 0,
            ..cfg
        };
        assert_eq!(
            simulate_neuron(&cfg, &SpikeVolley::silent(8))
                .unwrap()
                .fire_time,
            Some(0)
        );
    }

    #[test]
    fn strict_rule_fires_later() {
        let mut cfg = NeuronConfig::new(vec![3, 3, 0, 0], 4, DendriteKind::PcConventional, None);
        cfg.fire_rule = FireRule::Exceeds;
        let v = SpikeVolley::from_spikes(4, &[(0, 0), (1, 0)]).unwrap();
        assert_eq!(simulate_neuron(&cfg, &v).unwrap().fire_time, Some(2));
    }

    #[test]
    fn register_saturates() {
        let cfg = NeuronConfig::new(vec![7; 8], 31, DendriteKind::PcCompact, None);
        let v = SpikeVolley::from_spikes(8, &(0..8).map(|i| (i, 0)).collect::<Vec<_>>()).unwrap();
        let r = simulate_neuron(&cfg, &v).unwrap();
        assert_eq!(*r.trace.last().unwrap(), 31);
        assert_eq!(r.fire_time, Some(3));
    }

    #[test]
    fn config_errors() {
        let cfg = NeuronConfig::new(vec![1; 4], 32, DendriteKind::PcCompact, None);
        assert!(matches!(cfg.validate(), Err(NeuronError::Config(_))));
        let cfg = NeuronConfig::new(vec![8; 4], 3, DendriteKind::PcCompact, None);
        assert!(matches!(cfg.validate(), Err(NeuronError::Config(_))));
        let cfg = NeuronConfig::new(vec![1; 4], 3, DendriteKind::TopkPc, Some(5));
        assert!(matches!(cfg.validate(), Err(NeuronError::Config(_))));
        let cfg = NeuronConfig::new(vec![1; 4], 3, DendriteKind::SortingPc, None);
        assert!(matches!(cfg.validate(), Err(NeuronError::MissingK(_))));
    }

    #[test]
    fn config_json_defaults() {
        let cfg: NeuronConfig = serde_json::from_str(
            r#"{"n":2,"weights":[3,1],"threshold":2,"dendrite":"topk-pc","k":2}"#,
        )
        .unwrap();
        assert_eq!(
            cfg,
            NeuronConfig::new(vec![3, 1], 2, DendriteKind::TopkPc, Some(2))
        );
        assert_eq!(cfg.cycles(), 15);
    }

    #[test]
    fn result_json_shape() {
        let cfg = NeuronConfig::new(vec![1], 5, DendriteKind::PcCompact, None);
        let r = simulate_neuron(&cfg, &SpikeVolley::silent(1)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(v["fire_time"].is_null());
        assert_eq!(v["dropped_spikes"], 0);
        assert_eq!(v["trace"].as_array().unwrap().len(), 15);
    }
}
