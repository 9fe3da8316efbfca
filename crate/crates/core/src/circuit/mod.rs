//! Combinational Boolean circuits as DAGs of typed gates.
//!
//! A circuit is a list of nodes in topological order: every gate's parents
//! have smaller ids. Inputs and outputs are ordered; the input order defines
//! the bit order of input words.

mod normalize;
pub mod random;

pub use normalize::normalize_and_not;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Index of a node inside one circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Logical connective of a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GateOp {
    Not,
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    Const0,
    Const1,
    Maj3,
    /// `Mux(s, a, b)` = `a` if `s` else `b`.
    Mux,
}

impl GateOp {
    pub const ALL: [GateOp; 11] = [
        GateOp::Not,
        GateOp::And,
        GateOp::Or,
        GateOp::Xor,
        GateOp::Nand,
        GateOp::Nor,
        GateOp::Xnor,
        GateOp::Const0,
        GateOp::Const1,
        GateOp::Maj3,
        GateOp::Mux,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateOp::Const0 | GateOp::Const1 => 0,
            GateOp::Not => 1,
            GateOp::And | GateOp::Or | GateOp::Xor | GateOp::Nand | GateOp::Nor | GateOp::Xnor => 2,
            GateOp::Maj3 | GateOp::Mux => 3,
        }
    }

    pub fn eval(self, args: &[bool]) -> bool {
        match self {
            GateOp::Not => !args[0],
            GateOp::And => args[0] && args[1],
            GateOp::Or => args[0] || args[1],
            GateOp::Xor => args[0] ^ args[1],
            GateOp::Nand => !(args[0] && args[1]),
            GateOp::Nor => !(args[0] || args[1]),
            GateOp::Xnor => args[0] == args[1],
            GateOp::Const0 => false,
            GateOp::Const1 => true,
            GateOp::Maj3 => (args[0] && args[1]) || (args[0] && args[2]) || (args[1] && args[2]),
            GateOp::Mux => {
                if args[0] {
                    args[1]
                } else {
                    args[2]
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateOp::Not => "NOT",
            GateOp::And => "AND",
            GateOp::Or => "OR",
            GateOp::Xor => "XOR",
            GateOp::Nand => "NAND",
            GateOp::Nor => "NOR",
            GateOp::Xnor => "XNOR",
            GateOp::Const0 => "CONST0",
            GateOp::Const1 => "CONST1",
            GateOp::Maj3 => "MAJ3",
            GateOp::Mux => "MUX",
        }
    }

    pub fn from_name(name: &str) -> Option<GateOp> {
        GateOp::ALL.iter().copied().find(|op| op.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Input,
    Gate(GateOp),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    pub parents: Vec<NodeId>,
}

impl Node {
    pub fn is_input(&self) -> bool {
        matches!(self.kind, NodeKind::Input)
    }

    pub fn gate_op(&self) -> Option<GateOp> {
        match self.kind {
            NodeKind::Input => None,
            NodeKind::Gate(op) => Some(op),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CircuitError {
    ArityMismatch {
        op: GateOp,
        expected: usize,
        got: usize,
    },
    UnknownNode(NodeId),
    ConeOfInput(NodeId),
    InputCountMismatch {
        left: usize,
        right: usize,
    },
    WordLength {
        expected: usize,
        got: usize,
    },
    NotAGate(NodeId),
}

impl fmt::Display for CircuitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitError::ArityMismatch { op, expected, got } => {
                write!(f, "{} expects {expected} parents, got {got}", op.name())
            }
            CircuitError::UnknownNode(id) => write!(f, "reference to unknown node {id}"),
            CircuitError::ConeOfInput(id) => write!(f, "node {id} is an input and has no cone"),
            CircuitError::InputCountMismatch { left, right } => {
                write!(f, "input counts differ: {left} vs {right}")
            }
            CircuitError::WordLength { expected, got } => {
                write!(f, "input word has {got} bits, circuit expects {expected}")
            }
            CircuitError::NotAGate(id) => write!(f, "node {id} is not a gate"),
        }
    }
}

impl core::error::Error for CircuitError {}

/// An input word: one bit per circuit input, in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputWord(pub Vec<bool>);

impl InputWord {
    /// Lowest `n` bits of `value`; bit `i` feeds input `i`.
    pub fn from_int(value: u64, n: usize) -> InputWord {
        InputWord((0..n).map(|i| value >> i & 1 == 1).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Result of simulating a circuit on one input word.
#[derive(Debug, Clone)]
pub struct Interpretation {
    /// Value of every node, indexed by node id.
    pub values: Vec<bool>,
    /// Output bits in declared output order.
    pub outputs: Vec<bool>,
}

/// Result of gluing two circuits over a shared input set.
#[derive(Debug, Clone)]
pub struct Glued {
    pub circuit: Circuit,
    /// Node id in `circuit` for each node of the left operand.
    pub left_nodes: Vec<NodeId>,
    /// Node id in `circuit` for each node of the right operand.
    pub right_nodes: Vec<NodeId>,
    /// Output count of each half (`m`); the glued circuit has `2m` outputs.
    pub outputs_per_side: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    nodes: Vec<Node>,
    inputs: Vec<NodeId>,
    outputs: Vec<NodeId>,
}

/// Incremental circuit constructor. Parents must already exist when a gate
/// is added, so the node list is topologically ordered by construction and
/// cycles are impossible.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    nodes: Vec<Node>,
    inputs: Vec<NodeId>,
}

impl CircuitBuilder {
    pub fn new() -> CircuitBuilder {
        CircuitBuilder::default()
    }

    pub fn add_input(&mut self) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            kind: NodeKind::Input,
            parents: Vec::new(),
        });
        self.inputs.push(id);
        id
    }

    pub fn add_gate(&mut self, op: GateOp, parents: &[NodeId]) -> Result<NodeId, CircuitError> {
        if parents.len() != op.arity() {
            return Err(CircuitError::ArityMismatch {
                op,
                expected: op.arity(),
                got: parents.len(),
            });
        }
        let id = NodeId(self.nodes.len() as u32);
        for &p in parents {
            if p.index() >= self.nodes.len() {
                return Err(CircuitError::UnknownNode(p));
            }
        }
        self.nodes.push(Node {
            kind: NodeKind::Gate(op),
            parents: parents.to_vec(),
        });
        Ok(id)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn build(self, outputs: Vec<NodeId>) -> Result<Circuit, CircuitError> {
        for &o in &outputs {
            if o.index() >= self.nodes.len() {
                return Err(CircuitError::UnknownNode(o));
            }
        }
        Ok(Circuit {
            nodes: self.nodes,
            inputs: self.inputs,
            outputs,
        })
    }
}

impl Circuit {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn gate_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.is_input())
            .map(|(i, _)| NodeId(i as u32))
    }

    pub fn gate_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.is_input()).count()
    }

    /// True when every gate is in the `{AND, NOT, CONST}` basis.
    pub fn is_and_inverter(&self) -> bool {
        self.nodes.iter().all(|n| {
            matches!(
                n.kind,
                NodeKind::Input
                    | NodeKind::Gate(GateOp::And)
                    | NodeKind::Gate(GateOp::Not)
                    | NodeKind::Gate(GateOp::Const0)
                    | NodeKind::Gate(GateOp::Const1)
            )
        })
    }

    /// Partitions the nodes into layers: layer 0 is the inputs, and each
    /// later layer holds the gates whose parents all lie in earlier layers.
    pub fn layers(&self) -> Vec<Vec<NodeId>> {
        let mut layer_of = vec![0usize; self.nodes.len()];
        let mut max_layer = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            if node.is_input() {
                continue;
            }
            let parent_max = node
                .parents
                .iter()
                .map(|p| layer_of[p.index()])
                .max()
                .unwrap_or(0);
            layer_of[i] = parent_max + 1;
            max_layer = max_layer.max(layer_of[i]);
        }
        let mut layers = vec![Vec::new(); max_layer + 1];
        for (i, &k) in layer_of.iter().enumerate() {
            layers[k].push(NodeId(i as u32));
        }
        layers
    }

    /// Simulates the circuit on an input word.
    pub fn interpret(&self, word: &InputWord) -> Result<Interpretation, CircuitError> {
        let mut values = vec![false; self.nodes.len()];
        self.interpret_into(word.bits(), &mut values)?;
        let outputs = self.outputs.iter().map(|o| values[o.index()]).collect();
        Ok(Interpretation { values, outputs })
    }

    /// Simulation into a caller-owned value buffer (resized as needed).
    pub fn interpret_into(&self, bits: &[bool], values: &mut Vec<bool>) -> Result<(), CircuitError> {
        if bits.len() != self.inputs.len() {
            return Err(CircuitError::WordLength {
                expected: self.inputs.len(),
                got: bits.len(),
            });
        }
        values.clear();
        values.resize(self.nodes.len(), false);
        for (pos, &input) in self.inputs.iter().enumerate() {
            values[input.index()] = bits[pos];
        }
        let mut args = [false; 3];
        for (i, node) in self.nodes.iter().enumerate() {
            let NodeKind::Gate(op) = node.kind else {
                continue;
            };
            for (k, p) in node.parents.iter().enumerate() {
                args[k] = values[p.index()];
            }
            values[i] = op.eval(&args[..node.parents.len()]);
        }
        Ok(())
    }

    /// Output bits of the simulation only.
    pub fn eval(&self, word: &InputWord) -> Result<Vec<bool>, CircuitError> {
        Ok(self.interpret(word)?.outputs)
    }

    /// The cone of gate `v`: all predecessors of `v` plus `v` itself, and
    /// the ancestor set (the inputs among them).
    pub fn cone(&self, v: NodeId) -> Result<Cone, CircuitError> {
        if v.index() >= self.nodes.len() {
            return Err(CircuitError::UnknownNode(v));
        }
        if self.nodes[v.index()].is_input() {
            return Err(CircuitError::ConeOfInput(v));
        }
        let mut in_cone = vec![false; self.nodes.len()];
        let mut stack = vec![v];
        in_cone[v.index()] = true;
        while let Some(u) = stack.pop() {
            for &p in &self.nodes[u.index()].parents {
                if !in_cone[p.index()] {
                    in_cone[p.index()] = true;
                    stack.push(p);
                }
            }
        }
        let nodes: Vec<NodeId> = (0..self.nodes.len())
            .filter(|&i| in_cone[i])
            .map(|i| NodeId(i as u32))
            .collect();
        let ancestors: Vec<NodeId> = self
            .inputs
            .iter()
            .copied()
            .filter(|id| in_cone[id.index()])
            .collect();
        Ok(Cone { nodes, ancestors })
    }

    /// Glues two circuits over a shared input set. The result computes both
    /// functions on the same word and exposes `2m` outputs, the left outputs
    /// first.
    pub fn glue(left: &Circuit, right: &Circuit) -> Result<Glued, CircuitError> {
        if left.num_inputs() != right.num_inputs() {
            return Err(CircuitError::InputCountMismatch {
                left: left.num_inputs(),
                right: right.num_inputs(),
            });
        }
        if left.num_outputs() != right.num_outputs() {
            return Err(CircuitError::InputCountMismatch {
                left: left.num_outputs(),
                right: right.num_outputs(),
            });
        }
        let mut builder = CircuitBuilder::new();
        let shared: Vec<NodeId> = (0..left.num_inputs()).map(|_| builder.add_input()).collect();

        let mut copy_half = |half: &Circuit| -> Result<Vec<NodeId>, CircuitError> {
            let mut map = vec![NodeId(u32::MAX); half.num_nodes()];
            for (pos, &input) in half.inputs.iter().enumerate() {
                map[input.index()] = shared[pos];
            }
            for (i, node) in half.nodes.iter().enumerate() {
                let NodeKind::Gate(op) = node.kind else {
                    continue;
                };
                let parents: Vec<NodeId> = node.parents.iter().map(|p| map[p.index()]).collect();
                map[i] = builder.add_gate(op, &parents)?;
            }
            Ok(map)
        };

        let left_nodes = copy_half(left)?;
        let right_nodes = copy_half(right)?;
        let mut outputs: Vec<NodeId> = left
            .outputs
            .iter()
            .map(|o| left_nodes[o.index()])
            .collect();
        outputs.extend(right.outputs.iter().map(|o| right_nodes[o.index()]));
        let circuit = builder.build(outputs)?;
        Ok(Glued {
            circuit,
            left_nodes,
            right_nodes,
            outputs_per_side: left.num_outputs(),
        })
    }

    /// Copy of the circuit with one gate's connective replaced. The new op
    /// must have the same arity.
    pub fn replace_gate_op(&self, gate: NodeId, op: GateOp) -> Result<Circuit, CircuitError> {
        if gate.index() >= self.nodes.len() {
            return Err(CircuitError::UnknownNode(gate));
        }
        let node = &self.nodes[gate.index()];
        let NodeKind::Gate(_) = node.kind else {
            return Err(CircuitError::NotAGate(gate));
        };
        if node.parents.len() != op.arity() {
            return Err(CircuitError::ArityMismatch {
                op,
                expected: op.arity(),
                got: node.parents.len(),
            });
        }
        let mut clone = self.clone();
        clone.nodes[gate.index()].kind = NodeKind::Gate(op);
        Ok(clone)
    }
}

#[derive(Debug, Clone)]
pub struct Cone {
    /// All predecessors of `v` plus `v`, by ascending node id.
    pub nodes: Vec<NodeId>,
    /// The inputs among them, in input order.
    pub ancestors: Vec<NodeId>,
}

/// The three-input example circuit used across the test suites: eight gates,
/// one output.
///
/// ```text
/// g0 = NOT i0      g1 = i0 AND i1   g2 = i1 XOR i2
/// g3 = g1 OR g2    g4 = g1 AND g2
/// g5 = g0 AND g3   g6 = g3 AND g4
/// o  = g5 XOR g6
/// ```
pub fn example_circuit() -> Circuit {
    let mut b = CircuitBuilder::new();
    let i0 = b.add_input();
    let i1 = b.add_input();
    let i2 = b.add_input();
    let g0 = b.add_gate(GateOp::Not, &[i0]).unwrap();
    let g1 = b.add_gate(GateOp::And, &[i0, i1]).unwrap();
    let g2 = b.add_gate(GateOp::Xor, &[i1, i2]).unwrap();
    let g3 = b.add_gate(GateOp::Or, &[g1, g2]).unwrap();
    let g4 = b.add_gate(GateOp::And, &[g1, g2]).unwrap();
    let g5 = b.add_gate(GateOp::And, &[g0, g3]).unwrap();
    let g6 = b.add_gate(GateOp::And, &[g3, g4]).unwrap();
    let o = b.add_gate(GateOp::Xor, &[g5, g6]).unwrap();
    b.build(vec![o]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_layer_sizes() {
        let c = example_circuit();
        let sizes: Vec<usize> = c.layers().iter().map(|l| l.len()).collect();
        assert_eq!(sizes, vec![3, 3, 2, 2, 1]);
    }

    #[test]
    fn no_gates_single_layer() {
        let mut b = CircuitBuilder::new();
        b.add_input();
        b.add_input();
        let c = b.build(vec![]).unwrap();
        assert_eq!(c.layers(), vec![vec![NodeId(0), NodeId(1)]]);
    }

    #[test]
    fn not_chain_layers() {
        let mut b = CircuitBuilder::new();
        let i = b.add_input();
        let g1 = b.add_gate(GateOp::Not, &[i]).unwrap();
        let g2 = b.add_gate(GateOp::Not, &[g1]).unwrap();
        let c = b.build(vec![g2]).unwrap();
        assert_eq!(c.layers(), vec![vec![i], vec![g1], vec![g2]]);
    }

    #[test]
    fn example_interpretation() {
        let c = example_circuit();
        let word = InputWord(vec![false, true, true]);
        let interp = c.interpret(&word).unwrap();
        assert_eq!(interp.outputs, vec![false]);
        // gate values in id order: NOT, AND, XOR, OR, AND, AND, AND, XOR
        let gate_values: Vec<bool> = (3..11).map(|i| interp.values[i]).collect();
        assert_eq!(
            gate_values,
            vec![true, false, false, false, false, false, false, false]
        );
    }

    #[test]
    fn single_and_gate() {
        let mut b = CircuitBuilder::new();
        let x = b.add_input();
        let y = b.add_input();
        let g = b.add_gate(GateOp::And, &[x, y]).unwrap();
        let c = b.build(vec![g]).unwrap();
        assert_eq!(c.eval(&InputWord(vec![true, true])).unwrap(), vec![true]);
        assert_eq!(c.eval(&InputWord(vec![true, false])).unwrap(), vec![false]);
    }

    #[test]
    fn cone_of_example_gates() {
        let c = example_circuit();
        // g1 = i0 AND i1 has node id 4
        let cone = c.cone(NodeId(4)).unwrap();
        assert_eq!(cone.ancestors, vec![NodeId(0), NodeId(1)]);
        assert_eq!(cone.nodes, vec![NodeId(0), NodeId(1), NodeId(4)]);
        // the output gate depends on all three inputs
        let cone = c.cone(NodeId(10)).unwrap();
        assert_eq!(cone.ancestors, vec![NodeId(0), NodeId(1), NodeId(2)]);
        // inputs have no cone
        assert!(matches!(
            c.cone(NodeId(0)),
            Err(CircuitError::ConeOfInput(_))
        ));
    }

    #[test]
    fn cone_of_gate_with_only_input_parents() {
        let mut b = CircuitBuilder::new();
        let x = b.add_input();
        let y = b.add_input();
        let g = b.add_gate(GateOp::Or, &[x, y]).unwrap();
        let c = b.build(vec![g]).unwrap();
        let cone = c.cone(g).unwrap();
        assert_eq!(cone.nodes, vec![x, y, g]);
    }

    #[test]
    fn glue_two_single_gate_circuits() {
        let mk = |op| {
            let mut b = CircuitBuilder::new();
            let x = b.add_input();
            let y = b.add_input();
            let g = b.add_gate(op, &[x, y]).unwrap();
            b.build(vec![g]).unwrap()
        };
        let f = mk(GateOp::And);
        let h = mk(GateOp::Or);
        let glued = Circuit::glue(&f, &h).unwrap();
        assert_eq!(glued.circuit.num_inputs(), 2);
        assert_eq!(glued.circuit.num_outputs(), 2);
        assert_eq!(glued.circuit.gate_count(), 2);
        let out = glued.circuit.eval(&InputWord(vec![true, false])).unwrap();
        assert_eq!(out, vec![false, true]);
    }

    #[test]
    fn glue_same_circuit_duplicates_outputs() {
        let f = example_circuit();
        let glued = Circuit::glue(&f, &f).unwrap();
        for w in 0..8u64 {
            let word = InputWord::from_int(w, 3);
            let out = glued.circuit.eval(&word).unwrap();
            assert_eq!(out[0], out[1]);
        }
    }

    #[test]
    fn glue_mismatched_inputs_rejected() {
        let mut b = CircuitBuilder::new();
        b.add_input();
        let one = b.build(vec![]).unwrap();
        let mut b = CircuitBuilder::new();
        b.add_input();
        b.add_input();
        let two = b.build(vec![]).unwrap();
        assert!(Circuit::glue(&one, &two).is_err());
    }

    #[test]
    fn builder_rejects_bad_arity() {
        let mut b = CircuitBuilder::new();
        let x = b.add_input();
        assert!(matches!(
            b.add_gate(GateOp::And, &[x]),
            Err(CircuitError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn const_gates_simulate_as_fixed_values() {
        let mut b = CircuitBuilder::new();
        let x = b.add_input();
        let one = b.add_gate(GateOp::Const1, &[]).unwrap();
        let g = b.add_gate(GateOp::And, &[x, one]).unwrap();
        let c = b.build(vec![g]).unwrap();
        assert_eq!(c.eval(&InputWord(vec![true])).unwrap(), vec![true]);
        assert_eq!(c.eval(&InputWord(vec![false])).unwrap(), vec![false]);
        // const gates land in layer 1
        assert_eq!(c.layers()[1], vec![one]);
    }
}
