// SPDX-License-Identifier: Apache-2.0
//! Prune bitonic and bundled 8-input sorters to top-k selectors and print
//! their total/mandatory/half unit counts.
//!
//! Run with `cargo run --example selector_counts`.

use unary_topk::{gen_bitonic, prune_topk, SortingNetwork};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sources = [
        ("bitonic", gen_bitonic(8)?),
        ("optimal", SortingNetwork::bundled_optimal(8)?),
    ];
    println!("{:<8} {:>2}  total/mandatory/half", "source", "k");
    for (name, net) in &sources {
        for k in 1..=net.width() {
            let sel = prune_topk(net, k)?;
            println!("{name:<8} {k:>2}  {}", sel.counts());
        }
    }

    let sel = prune_topk(&sources[1].1, 2)?;
    println!(
        "\nselector file for the bundled sorter, k = 2:\n{}",
        sel.to_text()
    );
    for h in sel.half_units() {
        println!(
            "unit {:>2} drops its {:?} gate (wire {} unused)",
            h.position,
            sel.removed_gate(h),
            h.dead_wire
        );
    }
    Ok(())
}
