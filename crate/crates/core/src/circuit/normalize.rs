//! Lowering of the rich gate basis to `{AND, NOT, CONST}`.

use alloc::vec::Vec;

use super::{Circuit, CircuitBuilder, GateOp, NodeId, NodeKind};

struct Lowerer {
    builder: CircuitBuilder,
    /// Cached NOT node per source node, so shared inverters are not duplicated.
    not_cache: Vec<Option<NodeId>>,
}

impl Lowerer {
    fn not(&mut self, x: NodeId) -> NodeId {
        if self.not_cache.len() <= x.index() {
            self.not_cache.resize(x.index() + 1, None);
        }
        if let Some(n) = self.not_cache[x.index()] {
            return n;
        }
        let n = self.builder.add_gate(GateOp::Not, &[x]).unwrap();
        self.not_cache[x.index()] = Some(n);
        n
    }

    fn and(&mut self, x: NodeId, y: NodeId) -> NodeId {
        self.builder.add_gate(GateOp::And, &[x, y]).unwrap()
    }

    fn or(&mut self, x: NodeId, y: NodeId) -> NodeId {
        let nx = self.not(x);
        let ny = self.not(y);
        let a = self.and(nx, ny);
        self.not(a)
    }
}

/// Rewrites a circuit into the `{AND, NOT, CONST}` basis. The result computes
/// the same function (outputs and input order preserved).
pub fn normalize_and_not(circuit: &Circuit) -> Circuit {
    let mut lower = Lowerer {
        builder: CircuitBuilder::new(),
        not_cache: Vec::new(),
    };
    let mut map: Vec<NodeId> = Vec::with_capacity(circuit.num_nodes());
    for node in circuit.nodes() {
        let id = match node.kind {
            NodeKind::Input => lower.builder.add_input(),
            NodeKind::Gate(op) => {
                let p: Vec<NodeId> = node.parents.iter().map(|q| map[q.index()]).collect();
                match op {
                    GateOp::And => lower.and(p[0], p[1]),
                    GateOp::Not => lower.not(p[0]),
                    GateOp::Const0 | GateOp::Const1 => {
                        lower.builder.add_gate(op, &[]).unwrap()
                    }
                    GateOp::Or => lower.or(p[0], p[1]),
                    GateOp::Nand => {
                        let a = lower.and(p[0], p[1]);
                        lower.not(a)
                    }
                    GateOp::Nor => {
                        let nx = lower.not(p[0]);
                        let ny = lower.not(p[1]);
                        lower.and(nx, ny)
                    }
                    GateOp::Xor => {
                        let nx = lower.not(p[0]);
                        let ny = lower.not(p[1]);
                        let t1 = lower.and(p[0], ny);
                        let t2 = lower.and(nx, p[1]);
                        lower.or(t1, t2)
                    }
                    GateOp::Xnor => {
                        let nx = lower.not(p[0]);
                        let ny = lower.not(p[1]);
                        let both = lower.and(p[0], p[1]);
                        let neither = lower.and(nx, ny);
                        lower.or(both, neither)
                    }
                    GateOp::Maj3 => {
                        let ab = lower.and(p[0], p[1]);
                        let ac = lower.and(p[0], p[2]);
                        let bc = lower.and(p[1], p[2]);
                        let t = lower.or(ab, ac);
                        lower.or(t, bc)
                    }
                    GateOp::Mux => {
                        let ns = lower.not(p[0]);
                        let t1 = lower.and(p[0], p[1]);
                        let t2 = lower.and(ns, p[2]);
                        lower.or(t1, t2)
                    }
                }
            }
        };
        map.push(id);
    }
    let outputs = circuit
        .outputs()
        .iter()
        .map(|o| map[o.index()])
        .collect();
    lower.builder.build(outputs).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{example_circuit, InputWord};

    #[test]
    fn normalized_example_is_equivalent() {
        let c = example_circuit();
        let lowered = normalize_and_not(&c);
        assert!(lowered.is_and_inverter());
        for w in 0..8u64 {
            let word = InputWord::from_int(w, 3);
            assert_eq!(c.eval(&word).unwrap(), lowered.eval(&word).unwrap());
        }
    }

    #[test]
    fn normalized_covers_every_op() {
        use crate::circuit::CircuitBuilder;
        let mut b = CircuitBuilder::new();
        let x = b.add_input();
        let y = b.add_input();
        let z = b.add_input();
        let mut outs = Vec::new();
        for op in GateOp::ALL {
            let parents: Vec<NodeId> = [x, y, z][..op.arity()].to_vec();
            outs.push(b.add_gate(op, &parents).unwrap());
        }
        let c = b.build(outs).unwrap();
        let lowered = normalize_and_not(&c);
        assert!(lowered.is_and_inverter());
        for w in 0..8u64 {
            let word = InputWord::from_int(w, 3);
            assert_eq!(c.eval(&word).unwrap(), lowered.eval(&word).unwrap());
        }
    }
}
