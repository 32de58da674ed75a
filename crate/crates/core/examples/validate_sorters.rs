// SPDX-License-Identifier: Apache-2.0
//! Zero-one validation of generated and bundled sorters, and the
//! counterexample reported for a broken one.

use unary_topk::{gen_bitonic, validate_sorter, SortingNetwork, ValidationBudget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let budget = ValidationBudget::default();
    for n in [2, 4, 8, 16, 32, 64] {
        println!(
            "bitonic-{n:<3} {}",
            validate_sorter(&gen_bitonic(n)?, budget)
        );
    }
    for n in [4, 8, 16, 32, 64] {
        println!(
            "bundled-{n:<3} {}",
            validate_sorter(&SortingNetwork::bundled_optimal(n)?, budget)
        );
    }

    let net = SortingNetwork::bundled_optimal(8)?;
    let mut pairs: Vec<(usize, usize)> = net.units().iter().map(|u| (u.i, u.j)).collect();
    let removed = pairs.remove(10);
    let broken = SortingNetwork::from_pairs(8, &pairs)?;
    let report = validate_sorter(&broken, budget);
    println!("\nwithout unit {removed:?}: {report}");
    if let (Some(x), Some(y)) = (report.counterexample, report.counterexample_output) {
        println!("  input  {x}\n  output {y}");
    }
    Ok(())
}
