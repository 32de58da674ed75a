// SPDX-License-Identifier: Apache-2.0
//! One volley through the same neuron with each dendrite design.

use unary_topk::{simulate_neuron, DendriteKind, NeuronConfig, SpikeVolley};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let weights = vec![3, 3, 5, 7, 2, 0, 6, 4];
    let volley = SpikeVolley::from_spikes(8, &[(0, 0), (1, 0), (2, 1), (3, 1), (6, 4), (7, 6)])?;
    let base = NeuronConfig::new(weights, 14, DendriteKind::PcCompact, None);

    for (kind, k) in [
        (DendriteKind::PcConventional, None),
        (DendriteKind::PcCompact, None),
        (DendriteKind::SortingPc, Some(2)),
        (DendriteKind::TopkPc, Some(2)),
        (DendriteKind::TopkPc, Some(4)),
    ] {
        let cfg = base.with_dendrite(kind, k);
        let r = simulate_neuron(&cfg, &volley)?;
        let label = format!("{kind}{}", k.map(|k| format!(" k={k}")).unwrap_or_default());
        println!("{label:<18} active {:?}", r.active);
        println!("{:<18} incr   {:?}", "", r.increments);
        println!("{:<18} trace  {:?}", "", r.trace);
        let fire = r.fire_time.map_or("never".to_string(), |t| t.to_string());
        println!(
            "{:<18} fire {fire}, dropped {} pulses in {} cycles\n",
            "", r.dropped_spikes, r.truncated_cycles
        );
    }
    Ok(())
}
