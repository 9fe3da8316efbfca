//! ASCII AIGER ("aag") circuit files.
//!
//! Circuits in the `{AND, NOT, CONST}` basis are written as standard aag:
//! inverters fold into literal signs and constants become the literals 0/1,
//! so the files interoperate with ordinary AIGER tools. Circuits using the
//! richer basis keep every gate as a node: the body carries only inputs and
//! outputs, and the gates follow a `c ext-ops` marker line, one line per
//! gate in topological order:
//!
//! ```text
//! aag 5 2 0 1 0
//! 2
//! 4
//! 10
//! c ext-ops
//! 3 XOR 1 2
//! 4 AND 1 2
//! 5 OR 3 4
//! ```
//!
//! Ext-ops lines name gates by variable number (`literal / 2`), not by
//! literal. Latches are not supported.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use satpart_core::circuit::{Circuit, CircuitBuilder, GateOp, NodeId, NodeKind};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AigerError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("latches are not supported (sequential circuit)")]
    Sequential,
    #[error("literal {0} references an undefined variable")]
    Dangling(u64),
    #[error("definition cycle through variable {0}")]
    Cycle(u64),
    #[error("variable {0} defined more than once")]
    Redefined(u64),
}

fn parse_err(line: usize, msg: impl Into<String>) -> AigerError {
    AigerError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Writes a circuit in aag form, choosing the standard or ext-ops layout by
/// the gate basis.
pub fn write_circuit<W: Write>(circuit: &Circuit, w: &mut W) -> io::Result<()> {
    if circuit.is_and_inverter() {
        write_standard(circuit, w)
    } else {
        write_ext(circuit, w)
    }
}

pub fn write_circuit_file(circuit: &Circuit, path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_circuit(circuit, &mut w)?;
    w.flush()
}

fn write_standard<W: Write>(circuit: &Circuit, w: &mut W) -> io::Result<()> {
    // aig variable per input (in input order) and per AND gate (in id order)
    let mut var_of: Vec<u64> = vec![0; circuit.num_nodes()];
    let mut next = 1u64;
    for input in circuit.inputs() {
        var_of[input.index()] = next;
        next += 1;
    }
    let mut and_gates = Vec::new();
    for (i, node) in circuit.nodes().iter().enumerate() {
        if matches!(node.kind, NodeKind::Gate(GateOp::And)) {
            var_of[i] = next;
            next += 1;
            and_gates.push(NodeId(i as u32));
        }
    }
    // literal of a node, folding NOT chains and constants
    let lit_of = |start: NodeId| -> u64 {
        let mut id = start;
        let mut sign = 0u64;
        loop {
            let node = circuit.node(id);
            match node.kind {
                NodeKind::Gate(GateOp::Not) => {
                    sign ^= 1;
                    id = node.parents[0];
                }
                NodeKind::Gate(GateOp::Const0) => return sign,
                NodeKind::Gate(GateOp::Const1) => return 1 ^ sign,
                _ => return 2 * var_of[id.index()] + sign,
            }
        }
    };
    let max_var = next - 1;
    writeln!(
        w,
        "aag {} {} 0 {} {}",
        max_var,
        circuit.num_inputs(),
        circuit.num_outputs(),
        and_gates.len()
    )?;
    for input in circuit.inputs() {
        writeln!(w, "{}", 2 * var_of[input.index()])?;
    }
    for output in circuit.outputs() {
        writeln!(w, "{}", lit_of(*output))?;
    }
    for gate in and_gates {
        let node = circuit.node(gate);
        writeln!(
            w,
            "{} {} {}",
            2 * var_of[gate.index()],
            lit_of(node.parents[0]),
            lit_of(node.parents[1])
        )?;
    }
    Ok(())
}

fn write_ext<W: Write>(circuit: &Circuit, w: &mut W) -> io::Result<()> {
    let mut var_of: Vec<u64> = vec![0; circuit.num_nodes()];
    let mut next = 1u64;
    for input in circuit.inputs() {
        var_of[input.index()] = next;
        next += 1;
    }
    let gates: Vec<NodeId> = circuit.gate_ids().collect();
    for &g in &gates {
        var_of[g.index()] = next;
        next += 1;
    }
    writeln!(
        w,
        "aag {} {} 0 {} 0",
        next - 1,
        circuit.num_inputs(),
        circuit.num_outputs()
    )?;
    for input in circuit.inputs() {
        writeln!(w, "{}", 2 * var_of[input.index()])?;
    }
    for output in circuit.outputs() {
        writeln!(w, "{}", 2 * var_of[output.index()])?;
    }
    writeln!(w, "c ext-ops")?;
    for &g in &gates {
        let node = circuit.node(g);
        let op = node.gate_op().expect("gate id");
        write!(w, "{} {}", var_of[g.index()], op.name())?;
        for p in &node.parents {
            write!(w, " {}", var_of[p.index()])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
enum VarDef {
    Input(usize),
    And(u64, u64),
    Ext(GateOp, Vec<u64>),
}

pub fn read_circuit<R: BufRead>(r: R) -> Result<Circuit, AigerError> {
    let mut lines = r.lines().enumerate();
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty file"))?
        .1
        .map(|h| (1usize, h))
        .map_err(AigerError::Io)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 6 || fields[0] != "aag" {
        return Err(parse_err(lineno, "expected header 'aag M I L O A'"));
    }
    let nums: Vec<u64> = fields[1..6]
        .iter()
        .map(|s| s.parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|_| parse_err(lineno, "non-numeric header field"))?;
    let (max_var, num_in, num_latch, num_out, num_and) =
        (nums[0], nums[1], nums[2], nums[3], nums[4]);
    if num_latch != 0 {
        return Err(AigerError::Sequential);
    }

    let mut defs: HashMap<u64, VarDef> = HashMap::new();
    let mut outputs_lits: Vec<u64> = Vec::new();
    let mut body: Vec<(usize, String)> = Vec::new();
    let mut ext_lines: Vec<(usize, String)> = Vec::new();
    let mut in_ext = false;
    for (i, line) in lines {
        let line = line.map_err(AigerError::Io)?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if in_ext {
            if trimmed == "c" {
                break; // free-form comments follow
            }
            ext_lines.push((lineno, trimmed.to_string()));
            continue;
        }
        if trimmed == "c ext-ops" {
            in_ext = true;
            continue;
        }
        if trimmed == "c" {
            break;
        }
        // symbol table entries like "i0 name" are skipped
        let mut chars = trimmed.chars();
        let first = chars.next().unwrap();
        if matches!(first, 'i' | 'l' | 'o') && chars.next().is_some_and(|c| c.is_ascii_digit()) {
            continue;
        }
        body.push((lineno, trimmed.to_string()));
    }

    let expected = (num_in + num_out + num_and) as usize;
    if body.len() != expected {
        return Err(parse_err(
            0,
            format!("expected {expected} body lines, found {}", body.len()),
        ));
    }
    let parse_u64 = |s: &str, lineno: usize| -> Result<u64, AigerError> {
        s.parse::<u64>()
            .map_err(|_| parse_err(lineno, format!("bad number '{s}'")))
    };

    let mut cursor = body.iter();
    for pos in 0..num_in as usize {
        let (lineno, line) = cursor.next().unwrap();
        let lit = parse_u64(line, *lineno)?;
        if lit < 2 || lit % 2 != 0 || lit / 2 > max_var {
            return Err(parse_err(*lineno, format!("bad input literal {lit}")));
        }
        if defs.insert(lit / 2, VarDef::Input(pos)).is_some() {
            return Err(AigerError::Redefined(lit / 2));
        }
    }
    for _ in 0..num_out {
        let (lineno, line) = cursor.next().unwrap();
        let lit = parse_u64(line, *lineno)?;
        if lit / 2 > max_var {
            return Err(parse_err(*lineno, format!("output literal {lit} exceeds max var")));
        }
        outputs_lits.push(lit);
    }
    for _ in 0..num_and {
        let (lineno, line) = cursor.next().unwrap();
        let parts: Vec<u64> = line
            .split_whitespace()
            .map(|t| parse_u64(t, *lineno))
            .collect::<Result<_, _>>()?;
        if parts.len() != 3 {
            return Err(parse_err(*lineno, "and line needs 'lhs rhs0 rhs1'"));
        }
        let (lhs, rhs0, rhs1) = (parts[0], parts[1], parts[2]);
        if lhs % 2 != 0 || lhs < 2 || lhs / 2 > max_var {
            return Err(parse_err(*lineno, format!("bad and lhs {lhs}")));
        }
        if rhs0 / 2 > max_var || rhs1 / 2 > max_var {
            return Err(parse_err(*lineno, "and rhs exceeds max var"));
        }
        if defs.insert(lhs / 2, VarDef::And(rhs0, rhs1)).is_some() {
            return Err(AigerError::Redefined(lhs / 2));
        }
    }
    for (lineno, line) in &ext_lines {
        let mut tokens = line.split_whitespace();
        let var = parse_u64(tokens.next().unwrap(), *lineno)?;
        if var == 0 || var > max_var {
            return Err(parse_err(*lineno, format!("bad ext var {var}")));
        }
        let op_name = tokens
            .next()
            .ok_or_else(|| parse_err(*lineno, "missing gate op"))?;
        let op = GateOp::from_name(op_name)
            .ok_or_else(|| parse_err(*lineno, format!("unknown gate op '{op_name}'")))?;
        let parents: Vec<u64> = tokens
            .map(|t| parse_u64(t, *lineno))
            .collect::<Result<_, _>>()?;
        if parents.len() != op.arity() {
            return Err(parse_err(
                *lineno,
                format!("{op_name} expects {} parents, got {}", op.arity(), parents.len()),
            ));
        }
        if parents.iter().any(|&p| p == 0 || p > max_var) {
            return Err(parse_err(*lineno, "ext parent exceeds max var"));
        }
        if defs.insert(var, VarDef::Ext(op, parents)).is_some() {
            return Err(AigerError::Redefined(var));
        }
    }

    build_circuit(num_in as usize, max_var, &defs, &outputs_lits)
}

pub fn read_circuit_file(path: &Path) -> Result<Circuit, AigerError> {
    read_circuit(BufReader::new(File::open(path)?))
}

/// Node materialization state shared by the resolution helpers.
struct NodeArena {
    builder: CircuitBuilder,
    node_of_var: HashMap<u64, NodeId>,
    const_nodes: [Option<NodeId>; 2],
    not_cache: HashMap<NodeId, NodeId>,
}

impl NodeArena {
    /// Literal to node, assuming the underlying variable is already built.
    /// Negated literals share one inverter per source node.
    fn lit_node(&mut self, lit: u64) -> Result<NodeId, AigerError> {
        if lit <= 1 {
            let idx = lit as usize;
            if self.const_nodes[idx].is_none() {
                let op = if lit == 0 { GateOp::Const0 } else { GateOp::Const1 };
                self.const_nodes[idx] = Some(self.builder.add_gate(op, &[]).expect("const"));
            }
            return Ok(self.const_nodes[idx].unwrap());
        }
        let base = *self
            .node_of_var
            .get(&(lit / 2))
            .ok_or(AigerError::Dangling(lit))?;
        if lit % 2 == 0 {
            return Ok(base);
        }
        if let Some(&n) = self.not_cache.get(&base) {
            return Ok(n);
        }
        let n = self.builder.add_gate(GateOp::Not, &[base]).expect("arity 1");
        self.not_cache.insert(base, n);
        Ok(n)
    }
}

fn parent_vars_of(def: &VarDef) -> Vec<u64> {
    match def {
        VarDef::Input(_) => Vec::new(),
        VarDef::And(a, b) => [a / 2, b / 2].into_iter().filter(|&p| p > 0).collect(),
        VarDef::Ext(_, parents) => parents.clone(),
    }
}

/// Materializes the circuit from variable definitions: inputs first, then
/// gates in ascending variable order (depth-first over unresolved parents,
/// so out-of-order files still load). Cycles are detected by DFS coloring.
fn build_circuit(
    num_inputs: usize,
    _max_var: u64,
    defs: &HashMap<u64, VarDef>,
    outputs_lits: &[u64],
) -> Result<Circuit, AigerError> {
    let mut arena = NodeArena {
        builder: CircuitBuilder::new(),
        node_of_var: HashMap::new(),
        const_nodes: [None, None],
        not_cache: HashMap::new(),
    };
    let input_nodes: Vec<NodeId> = (0..num_inputs).map(|_| arena.builder.add_input()).collect();
    for (&var, def) in defs {
        if let VarDef::Input(pos) = def {
            arena.node_of_var.insert(var, input_nodes[*pos]);
        }
    }

    let mut gate_vars: Vec<u64> = defs
        .iter()
        .filter(|(_, d)| !matches!(d, VarDef::Input(_)))
        .map(|(&v, _)| v)
        .collect();
    gate_vars.sort_unstable();

    // two-phase DFS: entries are (var, expanded); a var is "open" from its
    // expansion until its build, and meeting an open parent is a cycle
    let mut open: HashMap<u64, bool> = HashMap::new();
    for &root in &gate_vars {
        if arena.node_of_var.contains_key(&root) {
            continue;
        }
        let mut stack: Vec<(u64, bool)> = vec![(root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if arena.node_of_var.contains_key(&v) {
                continue;
            }
            let def = defs.get(&v).ok_or(AigerError::Dangling(2 * v))?;
            if !expanded {
                open.insert(v, true);
                stack.push((v, true));
                for p in parent_vars_of(def) {
                    if !arena.node_of_var.contains_key(&p) {
                        if open.get(&p).copied().unwrap_or(false) {
                            return Err(AigerError::Cycle(p));
                        }
                        stack.push((p, false));
                    }
                }
                continue;
            }
            let node = match def {
                VarDef::Input(_) => unreachable!("inputs are pre-resolved"),
                VarDef::And(a, b) => {
                    let pa = arena.lit_node(*a)?;
                    let pb = arena.lit_node(*b)?;
                    arena.builder.add_gate(GateOp::And, &[pa, pb]).expect("arity 2")
                }
                VarDef::Ext(op, parents) => {
                    let ps: Vec<NodeId> = parents.iter().map(|p| arena.node_of_var[p]).collect();
                    arena.builder.add_gate(*op, &ps).expect("arity checked at parse")
                }
            };
            arena.node_of_var.insert(v, node);
            open.insert(v, false);
        }
    }

    let mut outputs = Vec::with_capacity(outputs_lits.len());
    for &lit in outputs_lits {
        outputs.push(arena.lit_node(lit)?);
    }
    arena
        .builder
        .build(outputs)
        .map_err(|e| parse_err(0, e.to_string()))
}
