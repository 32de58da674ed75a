// SPDX-License-Identifier: Apache-2.0
//! How often a k = 2 top-k dendrite changes a neuron's behaviour as the
//! input spike density grows.

use unary_topk::neuron::VolleyGenerator;
use unary_topk::{compare_designs, DendriteKind, NeuronConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:>3} {:>7} {:>10} {:>11} {:>8} {:>9}",
        "n", "density", "fire match", "trace match", "dropped", "violations"
    );
    for n in [16, 32, 64] {
        let weights: Vec<u32> = (0..n).map(|i| (i % 7 + 1) as u32).collect();
        let base = NeuronConfig::new(weights, 12, DendriteKind::PcCompact, None);
        let alt = base.with_dendrite(DendriteKind::TopkPc, Some(2));
        for density in [0.01, 0.02, 0.05, 0.1, 0.2, 0.4] {
            let volleys = VolleyGenerator::new(n, density, 2024)?.generate(2000);
            let r = compare_designs(&base, &alt, &volleys)?;
            println!(
                "{n:>3} {density:>7.2} {:>9.1}% {:>10.1}% {:>8} {:>9}",
                100.0 * r.fire_match_rate,
                100.0 * r.trace_match_rate,
                r.dropped_spikes,
                r.ordering_violations
            );
        }
    }
    Ok(())
}
