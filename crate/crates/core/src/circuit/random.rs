//! Random circuit generation for property tests and calibration runs.

use alloc::vec::Vec;

use rand::Rng;

use super::{Circuit, CircuitBuilder, GateOp, NodeId};

/// Gate ops drawn by [`random_circuit`]: the full basis minus constants,
/// which would pin variables and are exercised separately.
const RANDOM_OPS: [GateOp; 9] = [
    GateOp::Not,
    GateOp::And,
    GateOp::Or,
    GateOp::Xor,
    GateOp::Nand,
    GateOp::Nor,
    GateOp::Xnor,
    GateOp::Maj3,
    GateOp::Mux,
];

/// Builds a random circuit with `num_inputs` inputs and `num_gates` gates.
/// Parents are drawn uniformly among all earlier nodes, so the result is a
/// valid DAG. Outputs are a handful of gates including the last one.
pub fn random_circuit(rng: &mut impl Rng, num_inputs: usize, num_gates: usize) -> Circuit {
    assert!(num_inputs >= 1 && num_gates >= 1);
    let mut b = CircuitBuilder::new();
    for _ in 0..num_inputs {
        b.add_input();
    }
    let mut last = NodeId(0);
    for _ in 0..num_gates {
        let op = RANDOM_OPS[rng.random_range(0..RANDOM_OPS.len())];
        let avail = b.num_nodes() as u32;
        let parents: Vec<NodeId> = (0..op.arity())
            .map(|_| NodeId(rng.random_range(0..avail)))
            .collect();
        last = b.add_gate(op, &parents).unwrap();
    }
    let extra_outputs = rng.random_range(0..3usize);
    let mut outputs = Vec::with_capacity(1 + extra_outputs);
    outputs.push(last);
    for _ in 0..extra_outputs {
        let id = NodeId(rng.random_range(num_inputs as u32..(num_inputs + num_gates) as u32));
        if !outputs.contains(&id) {
            outputs.push(id);
        }
    }
    b.build(outputs).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randutil::prng;

    #[test]
    fn random_circuits_are_well_formed() {
        let mut rng = prng(7);
        for _ in 0..50 {
            let c = random_circuit(&mut rng, 4, 20);
            assert_eq!(c.num_inputs(), 4);
            assert_eq!(c.gate_count(), 20);
            assert!(!c.outputs().is_empty());
            // parents precede children
            for (i, node) in c.nodes().iter().enumerate() {
                for p in &node.parents {
                    assert!(p.index() < i);
                }
            }
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = random_circuit(&mut prng(42), 5, 30);
        let b = random_circuit(&mut prng(42), 5, 30);
        assert_eq!(a, b);
    }
}
