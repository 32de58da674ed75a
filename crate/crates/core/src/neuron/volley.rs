// SPDX-License-Identifier: Apache-2.0
//! Spike volleys: file formats and a seeded generator.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{synapse_pulse, NeuronError};

/// Spike time per input; `None` means the input never spikes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpikeVolley {
    times: Vec<Option<u32>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpikeRecord {
    input: usize,
    t: u32,
}

fn volley_err<T>(msg: impl Into<String>) -> Result<T, NeuronError> {
    Err(NeuronError::Volley(msg.into()))
}

impl SpikeVolley {
    pub fn silent(n: usize) -> Self {
        SpikeVolley {
            times: vec![None; n],
        }
    }

    pub fn from_times(times: Vec<Option<u32>>) -> Self {
        SpikeVolley { times }
    }

    /// Build from `(input, t)` pairs; each input may spike at most once.
    pub fn from_spikes(n: usize, spikes: &[(usize, u32)]) -> Result<Self, NeuronError> {
        let mut v = Self::silent(n);
        for &(input, t) in spikes {
            match v.times.get_mut(input) {
                None => return volley_err(format!("input {input} out of range for {n} inputs")),
                Some(Some(_)) => return volley_err(format!("input {input} spikes twice")),
                Some(slot) => *slot = Some(t),
            }
        }
        Ok(v)
    }

    pub fn width(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[Option<u32>] {
        &self.times
    }

    /// `(input, t)` for every spiking input, by input index.
    pub fn spikes(&self) -> Vec<(usize, u32)> {
        self.times
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|t| (i, t)))
            .collect()
    }

    pub fn check(&self, n: usize, window: u32) -> Result<(), NeuronError> {
        if self.width() != n {
            return volley_err(format!(
                "volley has {} inputs, neuron has {n}",
                self.width()
            ));
        }
        match self.spikes().into_iter().find(|&(_, t)| t >= window) {
            Some((i, t)) => volley_err(format!(
                "input {i} spikes at {t}, outside window 0..{window}"
            )),
            None => Ok(()),
        }
    }

    /// JSON array of `{"input": i, "t": t}` objects.
    pub fn from_json(text: &str, n: usize) -> Result<Self, NeuronError> {
        let recs: Vec<SpikeRecord> = serde_json::from_str(text)
            .map_err(|e| NeuronError::Volley(format!("bad volley JSON: {e}")))?;
        Self::from_spikes(n, &recs.iter().map(|r| (r.input, r.t)).collect::<Vec<_>>())
    }

    /// `input,t` lines; an optional `input,t` header and `#` comments are skipped.
    pub fn from_csv(text: &str, n: usize) -> Result<Self, NeuronError> {
        let mut spikes = Vec::new();
        for (row, rec) in csv_reader(text).records().enumerate() {
            let rec = rec.map_err(|e| NeuronError::Volley(format!("bad volley CSV: {e}")))?;
            if rec.get(0) == Some("input") {
                continue;
            }
            if rec.len() != 2 {
                return volley_err(format!("row {}: expected `input,t`", row + 1));
            }
            spikes.push((parse_field(&rec[0], row)?, parse_field(&rec[1], row)?));
        }
        Self::from_spikes(n, &spikes)
    }

    /// JSON when the text starts with `[`, CSV otherwise.
    pub fn parse(text: &str, n: usize) -> Result<Self, NeuronError> {
        if text.trim_start().starts_with('[') {
            Self::from_json(text, n)
        } else {
            Self::from_csv(text, n)
        }
    }

    pub fn to_json(&self) -> String {
        let recs: Vec<SpikeRecord> = self
            .spikes()
            .into_iter()
            .map(|(input, t)| SpikeRecord { input, t })
            .collect();
        serde_json::to_string(&recs).expect("plain data serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("input,t\n");
        for (i, t) in self.spikes() {
            s.push_str(&format!("{i},{t}\n"));
        }
        s
    }
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn parse_field<T: FromStr>(s: &str, row: usize) -> Result<T, NeuronError> {
    s.parse().map_err(|_| {
        NeuronError::Volley(format!(
            "row {}: {s:?} is not a non-negative integer",
            row + 1
        ))
    })
}

/// Read several volleys from one file.
///
/// JSON: an array of volley arrays. CSV: `volley,input,t` rows, volleys
/// numbered from 0; silent volleys can be listed as `v,,`. A single-volley
/// file in either format, including an empty `[]`, yields one volley.
pub fn parse_volley_set(text: &str, n: usize) -> Result<Vec<SpikeVolley>, NeuronError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        if let Ok(sets) = serde_json::from_str::<Vec<Vec<SpikeRecord>>>(text)
            .map(|s| (!s.is_empty()).then_some(s))
        {
            let Some(sets) = sets else {
                return Ok(vec![SpikeVolley::silent(n)]);
            };
            return sets
                .iter()
                .map(|recs| {
                    SpikeVolley::from_spikes(
                        n,
                        &recs.iter().map(|r| (r.input, r.t)).collect::<Vec<_>>(),
                    )
                })
                .collect();
        }
        return Ok(vec![SpikeVolley::from_json(text, n)?]);
    }
    let mut groups: Vec<Vec<(usize, u32)>> = Vec::new();
    let mut three = None;
    for (row, rec) in csv_reader(text).records().enumerate() {
        let rec = rec.map_err(|e| NeuronError::Volley(format!("bad volley CSV: {e}")))?;
        if matches!(rec.get(0), Some("input" | "volley")) {
            continue;
        }
        match *three.get_or_insert(rec.len() == 3) {
            false => return Ok(vec![SpikeVolley::from_csv(text, n)?]),
            true if rec.len() != 3 => {
                return volley_err(format!("row {}: expected `volley,input,t`", row + 1))
            }
            true => {
                let v: usize = parse_field(&rec[0], row)?;
                if groups.len() <= v {
                    groups.resize(v + 1, Vec::new());
                }
                if !rec[1].is_empty() {
                    groups[v].push((parse_field(&rec[1], row)?, parse_field(&rec[2], row)?));
                }
            }
        }
    }
    if three.is_none() {
        return Ok(vec![SpikeVolley::silent(n)]);
    }
    groups
        .iter()
        .map(|g| SpikeVolley::from_spikes(n, g))
        .collect()
}

/// CSV with one `volley,input,t` row per spike; silent volleys get `v,,`.
pub fn volley_set_to_csv(volleys: &[SpikeVolley]) -> String {
    let mut s = String::from("volley,input,t\n");
    for (v, volley) in volleys.iter().enumerate() {
        let spikes = volley.spikes();
        if spikes.is_empty() {
            s.push_str(&format!("{v},,\n"));
        }
        for (i, t) in spikes {
            s.push_str(&format!("{v},{i},{t}\n"));
        }
    }
    s
}

/// Number of pulsing synapses in each of `cycles` cycles.
pub fn active_profile(weights: &[u32], volley: &SpikeVolley, cycles: u32) -> Vec<u32> {
    (0..cycles)
        .map(|t| {
            weights
                .iter()
                .zip(volley.times())
                .filter(|(&w, &s)| synapse_pulse(w, s, t))
                .count() as u32
        })
        .collect()
}

/// Distribution of spike times inside the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeDistribution {
    Uniform,
    /// Number of failed Bernoulli(p) trials, clamped to the last cycle.
    Geometric(f64),
}

impl fmt::Display for TimeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeDistribution::Uniform => f.write_str("uniform"),
            TimeDistribution::Geometric(p) => write!(f, "geometric:{p}"),
        }
    }
}

impl FromStr for TimeDistribution {
    type Err = NeuronError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "uniform" {
            return Ok(TimeDistribution::Uniform);
        }
        let p = s
            .strip_prefix("geometric:")
            .and_then(|p| p.parse::<f64>().ok())
            .filter(|p| *p > 0.0 && *p <= 1.0);
        p.map(TimeDistribution::Geometric).ok_or_else(|| {
            NeuronError::Config(format!(
                "time distribution {s:?}: expected `uniform` or `geometric:P` with 0<P<=1"
            ))
        })
    }
}

/// Reproducible volley source: each input spikes with probability `density`
/// at a time drawn from the configured distribution.
#[derive(Debug, Clone)]
pub struct VolleyGenerator {
    n: usize,
    density: f64,
    times: TimeDistribution,
    window: u32,
    rng: ChaCha8Rng,
}

impl VolleyGenerator {
    pub fn new(n: usize, density: f64, seed: u64) -> Result<Self, NeuronError> {
        if !(0.0..=1.0).contains(&density) {
            return Err(NeuronError::Config(format!(
                "density {density} outside [0, 1]"
            )));
        }
        Ok(VolleyGenerator {
            n,
            density,
            times: TimeDistribution::Uniform,
            window: 8,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn with_times(mut self, times: TimeDistribution) -> Self {
        self.times = times;
        self
    }

    pub fn with_window(mut self, window: u32) -> Self {
        self.window = window.max(1);
        self
    }

    fn draw_time(&mut self) -> u32 {
        match self.times {
            TimeDistribution::Uniform => self.rng.gen_range(0..self.window),
            TimeDistribution::Geometric(p) => {
                let mut t = 0;
                while t + 1 < self.window && !self.rng.gen_bool(p) {
                    t += 1;
                }
                t
            }
        }
    }

    pub fn next_volley(&mut self) -> SpikeVolley {
        let times = (0..self.n)
            .map(|_| self.rng.gen_bool(self.density).then(|| self.draw_time()))
            .collect();
        SpikeVolley { times }
    }

    /// Like [`next_volley`](Self::next_volley), but a drawn spike is dropped
    /// whenever it would push some cycle above `max_active` pulsing synapses.
    /// Inputs are considered in a random order.
    pub fn next_bounded(&mut self, weights: &[u32], max_active: u32) -> SpikeVolley {
        let max_w = weights.iter().copied().max().unwrap_or(0);
        let mut profile = vec![0u32; (self.window + max_w) as usize];
        let mut order: Vec<usize> = (0..self.n).collect();
        order.shuffle(&mut self.rng);
        let mut times = vec![None; self.n];
        for i in order {
            if !self.rng.gen_bool(self.density) {
                continue;
            }
            let t = self.draw_time();
            let w = weights.get(i).copied().unwrap_or(0);
            let span = t as usize..(t + w) as usize;
            if profile[span.clone()].iter().all(|&a| a < max_active) {
                profile[span].iter_mut().for_each(|a| *a += 1);
                times[i] = Some(t);
            }
        }
        SpikeVolley { times }
    }

    pub fn generate(&mut self, count: usize) -> Vec<SpikeVolley> {
        (0..count).map(|_| self.next_volley()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_csv_agree() {
        let a = SpikeVolley::from_json(r#"[{"input":0,"t":0},{"input":3,"t":5}]"#, 4).unwrap();
        let b = SpikeVolley::from_csv("input,t\n0,0\n# note\n3, 5\n", 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.times(), &[Some(0), None, None, Some(5)]);
        assert_eq!(SpikeVolley::parse(&a.to_json(), 4).unwrap(), a);
        assert_eq!(SpikeVolley::parse(&a.to_csv(), 4).unwrap(), a);
    }

    #[test]
    fn bad_volleys() {
        assert!(SpikeVolley::from_csv("9,1\n", 4).is_err());
        assert!(SpikeVolley::from_csv("1,1\n1,2\n", 4).is_err());
        assert!(SpikeVolley::from_csv("1,-2\n", 4).is_err());
        assert!(SpikeVolley::from_json(r#"[{"input":0}]"#, 4).is_err());
        let v = SpikeVolley::from_spikes(2, &[(0, 8)]).unwrap();
        assert!(v.check(2, 8).is_err());
        assert!(v.check(2, 9).is_ok());
        assert!(v.check(3, 9).is_err());
    }

    #[test]
    fn volley_sets() {
        let mut g = VolleyGenerator::new(6, 0.4, 3).unwrap();
        let mut set = g.generate(20);
        set.push(SpikeVolley::silent(6));
        assert_eq!(parse_volley_set(&volley_set_to_csv(&set), 6).unwrap(), set);
        let json = format!(
            "[{}]",
            set.iter()
                .map(SpikeVolley::to_json)
                .collect::<Vec<_>>()
                .join(",")
        );
        assert_eq!(parse_volley_set(&json, 6).unwrap(), set);
        assert_eq!(parse_volley_set("0,1\n", 6).unwrap().len(), 1);
        assert_eq!(
            parse_volley_set("[]", 6).unwrap(),
            vec![SpikeVolley::silent(6)]
        );
        assert_eq!(
            parse_volley_set("input,t\n", 6).unwrap(),
            vec![SpikeVolley::silent(6)]
        );
    }

    #[test]
    fn generator_is_seeded() {
        let a = VolleyGenerator::new(16, 0.3, 42).unwrap().generate(50);
        let b = VolleyGenerator::new(16, 0.3, 42).unwrap().generate(50);
        let c = VolleyGenerator::new(16, 0.3, 43).unwrap().generate(50);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|v| v.check(16, 8).is_ok()));
    }

    #[test]
    fn bounded_generator_respects_limit() {
        let weights: Vec<u32> = (0..32).map(|i| (i % 8) as u32).collect();
        let mut g = VolleyGenerator::new(32, 0.5, 7).unwrap();
        for _ in 0..200 {
            let v = g.next_bounded(&weights, 2);
            assert!(active_profile(&weights, &v, 15).iter().all(|&a| a <= 2));
        }
    }

    #[test]
    fn geometric_times_skew_early() {
        let mut g = VolleyGenerator::new(64, 1.0, 1)
            .unwrap()
            .with_times("geometric:0.5".parse().unwrap());
        let v = g.next_volley();
        let early = v.spikes().iter().filter(|&&(_, t)| t < 2).count();
        assert!(early > 32, "{early}");
        assert!("geometric:0".parse::<TimeDistribution>().is_err());
    }
}
