// SPDX-License-Identifier: Apache-2.0
//! Cycle-by-cycle top-2 selection on pulse trains: whatever wires the
//! pulses arrive on, they leave packed onto the two output wires, and
//! any cycle with more than two pulses is truncated.

use unary_topk::topk::eval_topk_temporal;
use unary_topk::{prune_topk, SortingNetwork, TemporalStream};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sel = prune_topk(&SortingNetwork::bundled_optimal(16)?, 2)?;
    let mut wires = vec!["000000000000"; 16];
    wires[1] = "011100000000";
    wires[6] = "000011111000";
    wires[9] = "001111000000";
    wires[13] = "000000001110";
    let input = TemporalStream::from_wire_strings(&wires)?;
    let out = eval_topk_temporal(&sel, &input)?;

    println!("inputs (wire: cycles 0..{})", input.cycles());
    for i in 0..input.width() {
        if input.ones_count(i) > 0 {
            println!("  x{i:<2} {}", input.wire_string(i));
        }
    }
    println!("outputs");
    for i in 0..out.width() {
        println!("  y{i:<2} {}", out.wire_string(i));
    }
    let counts: Vec<String> = (0..input.cycles())
        .map(|t| {
            format!(
                "{}->{}",
                input.cycle(t).count_ones(),
                out.cycle(t).count_ones()
            )
        })
        .collect();
    println!("per-cycle pulses in->out: {}", counts.join(" "));
    Ok(())
}
