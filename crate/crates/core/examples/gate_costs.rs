// SPDX-License-Identifier: Apache-2.0
//! Gate-equivalent cost of every dendrite design across input counts and k.

use unary_topk::cost::{rank_designs, soma_estimate};
use unary_topk::{gen_bitonic, CellWeights, DendriteKind, NeuronConfig, SortingNetwork};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w = CellWeights::default();
    for n in [8, 16, 32, 64] {
        let nets = [
            ("optimal", SortingNetwork::bundled_optimal(n)?),
            ("bitonic", gen_bitonic(n)?),
        ];
        let named: Vec<(&str, &SortingNetwork)> = nets.iter().map(|(l, net)| (*l, net)).collect();
        for k in [2, 4] {
            println!("n = {n}, k = {k}");
            for r in rank_designs(n, k, &named, &w)? {
                println!(
                    "  {:<18} {:>4} GE  (AND2 {:>3}, OR2 {:>3}, HA {:>2}, FA {:>2}, removed {:>2})",
                    r.design,
                    r.total_ge,
                    r.and2,
                    r.or2,
                    r.half_adders,
                    r.full_adders,
                    r.removed_gates
                );
            }
        }
    }
    let soma = soma_estimate(
        &NeuronConfig::new(vec![0; 16], 1, DendriteKind::PcCompact, None),
        &w,
    );
    println!(
        "soma and axon, shared by every design: {} GE ({} FA, {} flops)",
        soma.ge, soma.full_adders, soma.flops
    );
    Ok(())
}
