//! Gate balance estimation by random simulation.
//!
//! A gate is balanced when it outputs 1 on exactly half of all input words.
//! The probability `p_v = Pr{g_v = 1}` of every gate is estimated from one
//! shared sample of uniform input words, sized by the Chernoff bound so that
//! each per-gate estimate is an `(ε, δ)`-approximation of `p_v`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::circuit::{Circuit, NodeId};
use crate::randutil::{self, random_word};

#[derive(Debug, Clone, PartialEq)]
pub enum BalanceError {
    ParamOutOfRange { name: &'static str, value: f64 },
    QTooLarge { q: usize, candidates: usize },
}

impl fmt::Display for BalanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BalanceError::ParamOutOfRange { name, value } => {
                write!(f, "{name} = {value} must lie strictly inside (0, 1)")
            }
            BalanceError::QTooLarge { q, candidates } => {
                write!(f, "cannot select {q} gates from {candidates} candidates")
            }
        }
    }
}

impl core::error::Error for BalanceError {}

/// Number of independent observations needed for an `(ε, δ)`-approximation
/// of a Bernoulli mean: `⌈4 ln(2/δ) / ε²⌉`.
pub fn samples_needed(epsilon: f64, delta: f64) -> Result<u64, BalanceError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(BalanceError::ParamOutOfRange {
            name: "epsilon",
            value: epsilon,
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BalanceError::ParamOutOfRange {
            name: "delta",
            value: delta,
        });
    }
    Ok(libm::ceil(4.0 * libm::log(2.0 / delta) / (epsilon * epsilon)) as u64)
}

/// Estimated output probability of a single gate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateBalance {
    pub node: NodeId,
    /// How many sampled words made the gate output 1.
    pub ones: u64,
    /// `ones / samples`.
    pub p_hat: f64,
}

/// Per-gate balance estimates for one circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    /// One entry per gate, in ascending node id order.
    pub entries: Vec<GateBalance>,
    pub epsilon: f64,
    pub delta: f64,
    pub samples: u64,
    pub seed: u64,
}

impl BalanceReport {
    pub fn entry(&self, node: NodeId) -> Option<&GateBalance> {
        self.entries.iter().find(|e| e.node == node)
    }
}

/// Simulates `samples_needed(ε, δ)` uniform words, one pass serving every
/// gate, and reports each gate's observed output frequency.
pub fn estimate_balance(
    circuit: &Circuit,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<BalanceReport, BalanceError> {
    let samples = samples_needed(epsilon, delta)?;
    let mut rng = randutil::prng(seed);
    let mut ones = vec![0u64; circuit.num_nodes()];
    let mut values = Vec::new();
    for _ in 0..samples {
        let word = random_word(&mut rng, circuit.num_inputs());
        circuit
            .interpret_into(&word, &mut values)
            .expect("word length matches circuit");
        for (count, &v) in ones.iter_mut().zip(values.iter()) {
            *count += u64::from(v);
        }
    }
    let entries = circuit
        .gate_ids()
        .map(|id| GateBalance {
            node: id,
            ones: ones[id.index()],
            p_hat: ones[id.index()] as f64 / samples as f64,
        })
        .collect();
    Ok(BalanceReport {
        entries,
        epsilon,
        delta,
        samples,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// Gates with `p_hat` closest to 1/2.
    Balanced,
    /// Gates with `p_hat` farthest from 1/2.
    Unbalanced,
}

/// Gates selected from the two halves of an equivalence-checking instance.
/// These are node ids in the respective source circuits; mapping them to CNF
/// variables of the glued encoding is the caller's step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionNodes {
    pub left: Vec<NodeId>,
    pub right: Vec<NodeId>,
}

fn select_from(
    report: &BalanceReport,
    q: usize,
    mode: SelectionMode,
) -> Result<Vec<NodeId>, BalanceError> {
    let mut candidates: Vec<&GateBalance> = report
        .entries
        .iter()
        .filter(|e| match mode {
            // frozen gates make degenerate cube halves; skip them when
            // looking for balanced variables
            SelectionMode::Balanced => e.p_hat > 0.0 && e.p_hat < 1.0,
            SelectionMode::Unbalanced => true,
        })
        .collect();
    if candidates.len() < q {
        return Err(BalanceError::QTooLarge {
            q,
            candidates: candidates.len(),
        });
    }
    let distance = |e: &GateBalance| libm::fabs(e.p_hat - 0.5);
    candidates.sort_by(|a, b| {
        let (da, db) = (distance(a), distance(b));
        let primary = match mode {
            SelectionMode::Balanced => da.total_cmp(&db),
            SelectionMode::Unbalanced => db.total_cmp(&da),
        };
        primary.then(a.node.cmp(&b.node))
    });
    Ok(candidates[..q].iter().map(|e| e.node).collect())
}

/// Picks `q` gates from each half by balance ranking. Ties break toward the
/// smaller node id, so selection is deterministic given the reports.
pub fn select_decomposition_set(
    left: &BalanceReport,
    right: &BalanceReport,
    q: usize,
    mode: SelectionMode,
) -> Result<DecompositionNodes, BalanceError> {
    Ok(DecompositionNodes {
        left: select_from(left, q, mode)?,
        right: select_from(right, q, mode)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, GateOp};

    fn xor_and_circuit() -> Circuit {
        let mut b = CircuitBuilder::new();
        let x = b.add_input();
        let y = b.add_input();
        let g_xor = b.add_gate(GateOp::Xor, &[x, y]).unwrap();
        let g_and = b.add_gate(GateOp::And, &[x, y]).unwrap();
        b.build(vec![g_xor, g_and]).unwrap()
    }

    #[test]
    fn reference_sample_sizes() {
        assert_eq!(samples_needed(0.05, 0.01).unwrap(), 8478);
        assert_eq!(samples_needed(0.01, 0.01).unwrap(), 211933);
        assert_eq!(samples_needed(0.1, 0.05).unwrap(), 1476);
    }

    #[test]
    fn samples_needed_rejects_bad_params() {
        assert!(samples_needed(0.0, 0.5).is_err());
        assert!(samples_needed(0.5, 1.0).is_err());
        assert!(samples_needed(-0.1, 0.5).is_err());
    }

    #[test]
    fn samples_needed_monotone() {
        let base = samples_needed(0.05, 0.01).unwrap();
        assert!(samples_needed(0.1, 0.01).unwrap() < base);
        assert!(samples_needed(0.05, 0.05).unwrap() < base);
    }

    #[test]
    fn analytic_gates_estimated_within_eps() {
        let c = xor_and_circuit();
        let report = estimate_balance(&c, 0.05, 0.01, 17).unwrap();
        assert_eq!(report.samples, 8478);
        let xor = &report.entries[0];
        let and = &report.entries[1];
        assert!((xor.p_hat - 0.5).abs() <= 0.05, "xor p_hat {}", xor.p_hat);
        assert!((and.p_hat - 0.25).abs() <= 0.05, "and p_hat {}", and.p_hat);
    }

    #[test]
    fn const_gate_is_exactly_one() {
        let mut b = CircuitBuilder::new();
        b.add_input();
        let one = b.add_gate(GateOp::Const1, &[]).unwrap();
        let c = b.build(vec![one]).unwrap();
        let report = estimate_balance(&c, 0.1, 0.1, 1).unwrap();
        assert_eq!(report.entries[0].p_hat, 1.0);
    }

    #[test]
    fn selection_modes_pick_the_expected_gate() {
        let c = xor_and_circuit();
        let report = estimate_balance(&c, 0.05, 0.01, 3).unwrap();
        let balanced =
            select_decomposition_set(&report, &report, 1, SelectionMode::Balanced).unwrap();
        assert_eq!(balanced.left, vec![NodeId(2)]); // the XOR gate
        let unbalanced =
            select_decomposition_set(&report, &report, 1, SelectionMode::Unbalanced).unwrap();
        assert_eq!(unbalanced.left, vec![NodeId(3)]); // the AND gate
    }

    #[test]
    fn q_larger_than_gate_count_rejected() {
        let c = xor_and_circuit();
        let report = estimate_balance(&c, 0.1, 0.1, 3).unwrap();
        assert!(matches!(
            select_decomposition_set(&report, &report, 3, SelectionMode::Balanced),
            Err(BalanceError::QTooLarge { .. })
        ));
    }

    #[test]
    fn selection_is_deterministic_with_ties() {
        // two identical XOR gates: the smaller node id must win
        let mut b = CircuitBuilder::new();
        let x = b.add_input();
        let y = b.add_input();
        let g1 = b.add_gate(GateOp::Xor, &[x, y]).unwrap();
        let g2 = b.add_gate(GateOp::Xor, &[x, y]).unwrap();
        let c = b.build(vec![g1, g2]).unwrap();
        let report = estimate_balance(&c, 0.1, 0.1, 5).unwrap();
        let picked =
            select_decomposition_set(&report, &report, 1, SelectionMode::Balanced).unwrap();
        assert_eq!(picked.left, vec![g1]);
    }
}
