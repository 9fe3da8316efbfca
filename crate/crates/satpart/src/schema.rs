//! JSON sidecar formats shared by the CLI subcommands.
//!
//! * variable maps (`*.vars.json`) record the circuit-node → DIMACS-variable
//!   mapping of an encoding, so partitionings built over circuit variables
//!   can be replayed against the CNF file;
//! * scheme files (`*.scheme.json`) carry a serialized partitioning;
//! * balance files record per-gate output-probability estimates;
//! * ledger records and job summaries belong to the job runner.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use satpart_core::balance::BalanceReport;
use satpart_core::circuit::{Glued, NodeId};
use satpart_core::cnf::Var;
use satpart_core::encode::CircuitCnf;
use satpart_core::estimator::HardnessEstimate;
use satpart_core::partition::Partitioning;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), SchemaError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, SchemaError> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Sidecar map from circuit nodes to CNF variables. For miter encodings the
/// per-half node maps are present so balance reports (which talk about
/// source-circuit nodes) can be resolved to variables of the glued CNF.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarMapFile {
    pub num_vars: u32,
    /// Input variables in input order.
    pub input_vars: Vec<u32>,
    /// Output variables in output order (both halves for a miter).
    pub output_vars: Vec<u32>,
    /// CNF variable of every circuit node, indexed by node id.
    pub node_vars: Vec<u32>,
    /// For miters: CNF variable of each node of the left source circuit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_node_vars: Option<Vec<u32>>,
    /// For miters: CNF variable of each node of the right source circuit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_node_vars: Option<Vec<u32>>,
    /// Output count per half for miters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs_per_side: Option<usize>,
}

impl VarMapFile {
    pub fn from_template(enc: &CircuitCnf) -> VarMapFile {
        VarMapFile {
            num_vars: enc.cnf.num_vars(),
            input_vars: enc.vars.input_vars().iter().map(|v| v.number()).collect(),
            output_vars: enc.vars.output_vars().iter().map(|v| v.number()).collect(),
            node_vars: enc.vars.node_vars().iter().map(|v| v.number()).collect(),
            left_node_vars: None,
            right_node_vars: None,
            outputs_per_side: None,
        }
    }

    pub fn from_miter(enc: &CircuitCnf, glued: &Glued) -> VarMapFile {
        let mut file = VarMapFile::from_template(enc);
        file.left_node_vars = Some(
            glued
                .left_nodes
                .iter()
                .map(|&n| enc.vars.var(n).number())
                .collect(),
        );
        file.right_node_vars = Some(
            glued
                .right_nodes
                .iter()
                .map(|&n| enc.vars.var(n).number())
                .collect(),
        );
        file.outputs_per_side = Some(glued.outputs_per_side);
        file
    }

    pub fn input_vars(&self) -> Vec<Var> {
        self.input_vars.iter().map(|&n| Var::new(n)).collect()
    }

    /// Variable of a node of the left source circuit (miter maps only).
    pub fn left_var(&self, node: NodeId) -> Option<Var> {
        self.left_node_vars
            .as_ref()
            .and_then(|m| m.get(node.index()))
            .map(|&n| Var::new(n))
    }

    pub fn right_var(&self, node: NodeId) -> Option<Var> {
        self.right_node_vars
            .as_ref()
            .and_then(|m| m.get(node.index()))
            .map(|&n| Var::new(n))
    }
}

/// A serialized partitioning plus how it was derived.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeFile {
    pub partitioning: Partitioning,
    pub size: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shuffle_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl SchemeFile {
    pub fn new(partitioning: Partitioning) -> SchemeFile {
        let size = partitioning.size();
        SchemeFile {
            partitioning,
            size,
            shuffle_seed: None,
            description: None,
        }
    }
}

/// Per-gate balance estimates for one circuit file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceFile {
    pub epsilon: f64,
    pub delta: f64,
    pub samples: u64,
    pub seed: u64,
    pub entries: Vec<BalanceEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceEntry {
    pub node: u32,
    pub ones: u64,
    pub p_hat: f64,
}

impl BalanceFile {
    pub fn from_report(report: &BalanceReport) -> BalanceFile {
        BalanceFile {
            epsilon: report.epsilon,
            delta: report.delta,
            samples: report.samples,
            seed: report.seed,
            entries: report
                .entries
                .iter()
                .map(|e| BalanceEntry {
                    node: e.node.0,
                    ones: e.ones,
                    p_hat: e.p_hat,
                })
                .collect(),
        }
    }

    pub fn to_report(&self) -> BalanceReport {
        BalanceReport {
            entries: self
                .entries
                .iter()
                .map(|e| satpart_core::balance::GateBalance {
                    node: NodeId(e.node),
                    ones: e.ones,
                    p_hat: e.p_hat,
                })
                .collect(),
            epsilon: self.epsilon,
            delta: self.delta,
            samples: self.samples,
            seed: self.seed,
        }
    }
}

/// One line of the append-only run ledger (JSONL).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LedgerRecord {
    pub cell: u64,
    pub status: RunStatusTag,
    pub wall_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conflicts: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decisions: Option<u64>,
    /// Satisfying assignment as a 0/1 string over variables 1..=n.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatusTag {
    Sat,
    Unsat,
    TimedOut,
}

/// Identity of a job for resume checks, stored as `job.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobFile {
    pub config_hash: String,
    pub cnf_sha256: String,
    pub scheme_sha256: Option<String>,
    pub oracle: String,
    pub sample: String,
    pub seed: u64,
    pub timeout_seconds: Option<f64>,
    pub expect_unsat: bool,
}

/// Final `summary.json` of a solve-all / estimate job.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryFile {
    pub config_hash: String,
    /// Partitioning size `s`.
    pub population: u64,
    /// Number of cells this job plans to solve (`N`, or `s` for solve-all).
    pub planned: u64,
    pub solved_now: u64,
    pub resumed: u64,
    pub wall_seconds: f64,
    /// Sum of per-cell wall times over all planned cells.
    pub cpu_seconds: f64,
    pub sat_cells: Vec<u64>,
    pub unsat_cells: u64,
    pub timed_out_cells: u64,
    pub estimates: EstimateSet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateSet {
    pub seconds: Option<UnitEstimate>,
    pub conflicts: Option<UnitEstimate>,
    pub propagations: Option<UnitEstimate>,
}

/// A hardness estimate in one unit, with Chebyshev confidence rows
/// instantiated from the sample moments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitEstimate {
    #[serde(flatten)]
    pub stats: HardnessEstimate,
    pub chebyshev: Vec<BoundRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRow {
    pub epsilon: f64,
    /// Pr{ mean within (1 ± ε)·E }; may be negative (vacuous).
    pub relative_confidence: f64,
    /// Pr{ |mean − E| ≤ ε }.
    pub absolute_confidence: f64,
}

const BOUND_EPSILONS: [f64; 4] = [0.01, 0.05, 0.1, 0.2];

impl UnitEstimate {
    pub fn new(stats: HardnessEstimate) -> UnitEstimate {
        let chebyshev = BOUND_EPSILONS
            .iter()
            .map(|&epsilon| BoundRow {
                epsilon,
                relative_confidence: stats.chebyshev_relative_confidence(epsilon),
                absolute_confidence: stats.chebyshev_absolute_confidence(epsilon),
            })
            .collect();
        UnitEstimate { stats, chebyshev }
    }
}
