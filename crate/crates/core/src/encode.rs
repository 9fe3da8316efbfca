//! Tseytin encodings: template CNF of a circuit and the miter CNF used for
//! equivalence checking.
//!
//! Each circuit node `i` is assigned CNF variable `i + 1`, so the mapping is
//! dense and stable. Gate clauses are the minimal per-connective sets:
//!
//! | gate            | clauses for `u ≡ g(..)`                                        |
//! |-----------------|----------------------------------------------------------------|
//! | `NOT x`         | `(u ∨ x) (¬u ∨ ¬x)`                                            |
//! | `x AND y`       | `(¬x ∨ ¬y ∨ u) (x ∨ ¬u) (y ∨ ¬u)`                              |
//! | `x OR y`        | `(x ∨ y ∨ ¬u) (¬x ∨ u) (¬y ∨ u)`                               |
//! | `x NAND y`      | `(¬x ∨ ¬y ∨ ¬u) (x ∨ u) (y ∨ u)`                               |
//! | `x NOR y`       | `(x ∨ y ∨ u) (¬x ∨ ¬u) (¬y ∨ ¬u)`                              |
//! | `x XOR y`       | `(¬x ∨ ¬y ∨ ¬u) (x ∨ y ∨ ¬u) (x ∨ ¬y ∨ u) (¬x ∨ y ∨ u)`        |
//! | `x XNOR y`      | `(¬x ∨ ¬y ∨ u) (x ∨ y ∨ u) (x ∨ ¬y ∨ ¬u) (¬x ∨ y ∨ ¬u)`        |
//! | `CONST0/1`      | `(¬u)` / `(u)`                                                 |
//! | `MAJ3(a,b,c)`   | `(¬u ∨ a ∨ b) (¬u ∨ a ∨ c) (¬u ∨ b ∨ c)` and duals             |
//! | `MUX(s,a,b)`    | `(¬s ∨ ¬a ∨ u) (¬s ∨ a ∨ ¬u) (s ∨ ¬b ∨ u) (s ∨ b ∨ ¬u)`        |

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::circuit::{Circuit, GateOp, NodeId, NodeKind};
use crate::cnf::{Clause, Cnf, Lit, Var};

/// Mapping between circuit nodes and CNF variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarMap {
    node_vars: Vec<Var>,
    input_vars: Vec<Var>,
    output_vars: Vec<Var>,
}

impl VarMap {
    pub fn var(&self, node: NodeId) -> Var {
        self.node_vars[node.index()]
    }

    pub fn node_vars(&self) -> &[Var] {
        &self.node_vars
    }

    /// Input variables in input order (`X^in`).
    pub fn input_vars(&self) -> &[Var] {
        &self.input_vars
    }

    /// Output variables in declared output order.
    pub fn output_vars(&self) -> &[Var] {
        &self.output_vars
    }

    /// Literals fixing the circuit inputs to `bits`.
    pub fn input_assumptions(&self, bits: &[bool]) -> Vec<Lit> {
        self.input_vars
            .iter()
            .zip(bits)
            .map(|(v, &b)| v.lit(b))
            .collect()
    }
}

/// A circuit encoding: the clause database plus the node/variable map.
#[derive(Debug, Clone)]
pub struct CircuitCnf {
    pub cnf: Cnf,
    pub vars: VarMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncodeError {
    OddOutputCount(usize),
    NoOutputs,
}

impl fmt::Display for EncodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodeError::OddOutputCount(n) => {
                write!(f, "miter needs an even output count, got {n}")
            }
            EncodeError::NoOutputs => write!(f, "miter needs at least two outputs"),
        }
    }
}

impl core::error::Error for EncodeError {}

fn gate_clauses(op: GateOp, u: Var, parents: &[Var], out: &mut Vec<Clause>) {
    let u1 = u.positive();
    let u0 = u.negative();
    match op {
        GateOp::Not => {
            let x = parents[0];
            out.push(vec![u1, x.positive()]);
            out.push(vec![u0, x.negative()]);
        }
        GateOp::And => {
            let (x, y) = (parents[0], parents[1]);
            out.push(vec![x.negative(), y.negative(), u1]);
            out.push(vec![x.positive(), u0]);
            out.push(vec![y.positive(), u0]);
        }
        GateOp::Or => {
            let (x, y) = (parents[0], parents[1]);
            out.push(vec![x.positive(), y.positive(), u0]);
            out.push(vec![x.negative(), u1]);
            out.push(vec![y.negative(), u1]);
        }
        GateOp::Nand => {
            let (x, y) = (parents[0], parents[1]);
            out.push(vec![x.negative(), y.negative(), u0]);
            out.push(vec![x.positive(), u1]);
            out.push(vec![y.positive(), u1]);
        }
        GateOp::Nor => {
            let (x, y) = (parents[0], parents[1]);
            out.push(vec![x.positive(), y.positive(), u1]);
            out.push(vec![x.negative(), u0]);
            out.push(vec![y.negative(), u0]);
        }
        GateOp::Xor => {
            let (x, y) = (parents[0], parents[1]);
            out.push(vec![x.negative(), y.negative(), u0]);
            out.push(vec![x.positive(), y.positive(), u0]);
            out.push(vec![x.positive(), y.negative(), u1]);
            out.push(vec![x.negative(), y.positive(), u1]);
        }
        GateOp::Xnor => {
            let (x, y) = (parents[0], parents[1]);
            out.push(vec![x.negative(), y.negative(), u1]);
            out.push(vec![x.positive(), y.positive(), u1]);
            out.push(vec![x.positive(), y.negative(), u0]);
            out.push(vec![x.negative(), y.positive(), u0]);
        }
        GateOp::Const0 => out.push(vec![u0]),
        GateOp::Const1 => out.push(vec![u1]),
        GateOp::Maj3 => {
            let (a, b, c) = (parents[0], parents[1], parents[2]);
            out.push(vec![u0, a.positive(), b.positive()]);
            out.push(vec![u0, a.positive(), c.positive()]);
            out.push(vec![u0, b.positive(), c.positive()]);
            out.push(vec![u1, a.negative(), b.negative()]);
            out.push(vec![u1, a.negative(), c.negative()]);
            out.push(vec![u1, b.negative(), c.negative()]);
        }
        GateOp::Mux => {
            let (s, a, b) = (parents[0], parents[1], parents[2]);
            out.push(vec![s.negative(), a.negative(), u1]);
            out.push(vec![s.negative(), a.positive(), u0]);
            out.push(vec![s.positive(), b.negative(), u1]);
            out.push(vec![s.positive(), b.positive(), u0]);
        }
    }
}

/// Tseytin transformation: the template CNF of a circuit. The satisfying
/// assignments restricted to the input variables are in bijection with the
/// input words.
pub fn template_cnf(circuit: &Circuit) -> CircuitCnf {
    let node_vars: Vec<Var> = (0..circuit.num_nodes()).map(Var::from_index).collect();
    let mut cnf = Cnf::new(circuit.num_nodes() as u32);
    let mut clauses = Vec::new();
    let mut parent_vars = Vec::with_capacity(3);
    for (i, node) in circuit.nodes().iter().enumerate() {
        let NodeKind::Gate(op) = node.kind else {
            continue;
        };
        parent_vars.clear();
        parent_vars.extend(node.parents.iter().map(|p| node_vars[p.index()]));
        gate_clauses(op, node_vars[i], &parent_vars, &mut clauses);
        for clause in clauses.drain(..) {
            cnf.add_clause(clause).expect("gate clause in range");
        }
    }
    let input_vars = circuit
        .inputs()
        .iter()
        .map(|n| node_vars[n.index()])
        .collect();
    let output_vars = circuit
        .outputs()
        .iter()
        .map(|n| node_vars[n.index()])
        .collect();
    CircuitCnf {
        cnf,
        vars: VarMap {
            node_vars,
            input_vars,
            output_vars,
        },
    }
}

/// Miter CNF of a glued circuit with `2m` outputs: the template CNF plus a
/// Tseytin-encoded `(y_1^f ⊕ y_1^h) ∨ … ∨ (y_m^f ⊕ y_m^h)` asserted true.
/// Unsatisfiable exactly when the two halves are equivalent.
///
/// The disjunction is encoded as a balanced OR tree with one fresh variable
/// per XOR and per OR node.
pub fn miter_cnf(glued: &Circuit) -> Result<CircuitCnf, EncodeError> {
    let total = glued.num_outputs();
    if total == 0 {
        return Err(EncodeError::NoOutputs);
    }
    if total % 2 != 0 {
        return Err(EncodeError::OddOutputCount(total));
    }
    let m = total / 2;
    let mut enc = template_cnf(glued);
    let cnf = &mut enc.cnf;
    let outs = enc.vars.output_vars.clone();

    // one fresh variable per output-pair XOR
    let mut level: Vec<Var> = Vec::with_capacity(m);
    for i in 0..m {
        let z = cnf.fresh_var();
        let mut clauses = Vec::new();
        gate_clauses(GateOp::Xor, z, &[outs[i], outs[m + i]], &mut clauses);
        for clause in clauses {
            cnf.add_clause(clause).expect("miter clause in range");
        }
        level.push(z);
    }
    // balanced OR tree over the XOR variables
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut iter = level.chunks(2);
        for pair in &mut iter {
            if pair.len() == 2 {
                let o = cnf.fresh_var();
                let mut clauses = Vec::new();
                gate_clauses(GateOp::Or, o, &[pair[0], pair[1]], &mut clauses);
                for clause in clauses {
                    cnf.add_clause(clause).expect("miter clause in range");
                }
                next.push(o);
            } else {
                next.push(pair[0]);
            }
        }
        level = next;
    }
    let root = level[0];
    cnf.add_clause(vec![root.positive()])
        .expect("root assertion in range");
    Ok(enc)
}
