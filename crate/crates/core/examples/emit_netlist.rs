// SPDX-License-Identifier: Apache-2.0
//! Emit the netlist of an 8-input top-2 dendrite, read it back and check it
//! against the behavioural model on every input.

use unary_topk::emit::{emit_dendrite, Netlist};
use unary_topk::neuron::Dendrite;
use unary_topk::{BitVector, DendriteKind, SortingNetwork};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = SortingNetwork::bundled_optimal(8)?;
    let text = emit_dendrite(DendriteKind::TopkPc, 8, Some(2), Some(&net))?.to_text();
    print!("{text}");

    let parsed = Netlist::parse(&text)?;
    let c = parsed.counts();
    println!(
        "\ncells: AND2 {}, OR2 {}, FA {}, CONST0 {}",
        c.and2, c.or2, c.fa, c.const0
    );
    println!("dead nets: {}", parsed.unread_constants().join(" "));

    let compiled = parsed.compile()?;
    let model = Dendrite::build(DendriteKind::TopkPc, 8, Some(2), Some(&net))?;
    let agree = (0..256u64).all(|v| {
        let x = BitVector::from_bits(8, v).unwrap();
        compiled.eval(v) == model.increment(&x).unwrap() as u64
    });
    println!("netlist agrees with the model on all 256 inputs: {agree}");
    Ok(())
}
