//! SAT partitionings of circuit encodings.
//!
//! Two families are provided. Group schemes split the input variables into
//! disjoint groups and constrain each group with a fixed Boolean function or
//! its negation, one sign per cell: XOR over pairs, majority over triples,
//! or a bent function over quadruples. Cube schemes take a decomposition set
//! of non-input variables and use all sign patterns over it as cells.
//!
//! Every cell is a pure function of (scheme, index), so any worker can
//! materialize any cell independently.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;

use crate::cnf::{Clause, Cnf, Var};
use crate::counting::{count_models_per_cell, CountError};
use crate::propagate::{PropagationState, Propagator};
use crate::randutil;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum GroupFamily {
    Xor2,
    Maj3,
    Bent4,
}

impl GroupFamily {
    pub fn group_size(self) -> usize {
        match self {
            GroupFamily::Xor2 => 2,
            GroupFamily::Maj3 => 3,
            GroupFamily::Bent4 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupFamily::Xor2 => "2-xor",
            GroupFamily::Maj3 => "3-maj",
            GroupFamily::Bent4 => "4-bent",
        }
    }

    pub fn from_name(name: &str) -> Option<GroupFamily> {
        match name {
            "2-xor" => Some(GroupFamily::Xor2),
            "3-maj" => Some(GroupFamily::Maj3),
            "4-bent" => Some(GroupFamily::Bent4),
            _ => None,
        }
    }
}

/// One input-variable group. Groups smaller than the family size are
/// remainder singletons constrained by a plain literal.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Group(pub Vec<Var>);

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupScheme {
    pub family: GroupFamily,
    pub groups: Vec<Group>,
    /// Variable count of the base CNF; bent groups allocate one fresh
    /// Tseytin variable each, numbered from `fresh_base + 1`.
    pub fresh_base: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CubeScheme {
    /// The decomposition set, in cube bit order.
    pub vars: Vec<Var>,
}

/// A finite, enumerable family of constraint formulas, each convertible to
/// clauses by cell index.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Partitioning {
    Group(GroupScheme),
    Cubes(CubeScheme),
    /// The trivial one-cell partitioning with an empty constraint.
    Whole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionError {
    TooManyCells { bits: usize },
    DuplicateVariable(Var),
    InputVariable(Var),
    EmptyDecompositionSet,
    NotInputVariable(Var),
}

impl fmt::Display for PartitionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionError::TooManyCells { bits } => {
                write!(f, "partitioning with 2^{bits} cells cannot be indexed")
            }
            PartitionError::DuplicateVariable(v) => write!(f, "variable {v} appears twice"),
            PartitionError::InputVariable(v) => {
                write!(f, "variable {v} is an input variable; cubes are built over gate variables")
            }
            PartitionError::EmptyDecompositionSet => write!(f, "decomposition set is empty"),
            PartitionError::NotInputVariable(v) => {
                write!(f, "variable {v} is not among the instance input variables")
            }
        }
    }
}

impl core::error::Error for PartitionError {}

fn xor2_clauses(sign: bool, x: Var, y: Var, out: &mut Vec<Clause>) {
    if sign {
        // x ⊕ y
        out.push(vec![x.positive(), y.positive()]);
        out.push(vec![x.negative(), y.negative()]);
    } else {
        // x ≡ y
        out.push(vec![x.positive(), y.negative()]);
        out.push(vec![x.negative(), y.positive()]);
    }
}

fn maj3_clauses(sign: bool, a: Var, b: Var, c: Var, out: &mut Vec<Clause>) {
    if sign {
        // at least two of three
        out.push(vec![a.positive(), b.positive()]);
        out.push(vec![a.positive(), c.positive()]);
        out.push(vec![b.positive(), c.positive()]);
    } else {
        // at most one of three
        out.push(vec![a.negative(), b.negative()]);
        out.push(vec![a.negative(), c.negative()]);
        out.push(vec![b.negative(), c.negative()]);
    }
}

/// `t ≡ (x1 ∧ x3) ⊕ (x2 ∧ x4)` followed by the unit `t^sign`. The bent
/// function itself is unbalanced (weight 6 of 16), so the two signs carve
/// cells of different sizes.
fn bent4_clauses(sign: bool, x: &[Var; 4], t: Var, out: &mut Vec<Clause>) {
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    // ¬t ∨ φ
    out.push(vec![t.negative(), x1.positive(), x2.positive()]);
    out.push(vec![t.negative(), x1.positive(), x4.positive()]);
    out.push(vec![t.negative(), x2.positive(), x3.positive()]);
    out.push(vec![t.negative(), x3.positive(), x4.positive()]);
    out.push(vec![
        t.negative(),
        x1.negative(),
        x2.negative(),
        x3.negative(),
        x4.negative(),
    ]);
    // t ∨ ¬φ
    out.push(vec![t.positive(), x1.positive(), x2.negative(), x4.negative()]);
    out.push(vec![t.positive(), x2.positive(), x1.negative(), x3.negative()]);
    out.push(vec![t.positive(), x3.positive(), x2.negative(), x4.negative()]);
    out.push(vec![t.positive(), x4.positive(), x1.negative(), x3.negative()]);
    out.push(vec![t.lit(sign)]);
}

impl Partitioning {
    /// Number of cells `s`.
    pub fn size(&self) -> u64 {
        match self {
            Partitioning::Group(g) => 1u64 << g.groups.len(),
            Partitioning::Cubes(c) => 1u64 << c.vars.len(),
            Partitioning::Whole => 1,
        }
    }

    /// The clause set of cell `index`; bit `j` of the index picks the sign
    /// of group / cube position `j`.
    pub fn cell(&self, index: u64) -> Vec<Clause> {
        debug_assert!(index < self.size());
        let mut out = Vec::new();
        match self {
            Partitioning::Whole => {}
            Partitioning::Cubes(c) => {
                for (j, &v) in c.vars.iter().enumerate() {
                    out.push(vec![v.lit(index >> j & 1 == 1)]);
                }
            }
            Partitioning::Group(g) => {
                let mut bent_seq = 0u32;
                for (j, group) in g.groups.iter().enumerate() {
                    let sign = index >> j & 1 == 1;
                    match (g.family, group.0.as_slice()) {
                        (_, [x]) => out.push(vec![x.lit(sign)]),
                        (GroupFamily::Xor2, [x, y]) => xor2_clauses(sign, *x, *y, &mut out),
                        (GroupFamily::Maj3, [a, b, c]) => maj3_clauses(sign, *a, *b, *c, &mut out),
                        (GroupFamily::Bent4, [x1, x2, x3, x4]) => {
                            bent_seq += 1;
                            let t = Var::new(g.fresh_base + bent_seq);
                            bent4_clauses(sign, &[*x1, *x2, *x3, *x4], t, &mut out);
                        }
                        _ => unreachable!("group sizes are validated at build time"),
                    }
                }
            }
        }
        out
    }

    /// All cells, materialized. Intended for small partitionings.
    pub fn cells(&self) -> Vec<Vec<Clause>> {
        (0..self.size()).map(|i| self.cell(i)).collect()
    }
}

/// Builds a group partitioning over the instance inputs. Groups are
/// consecutive runs of `input_vars` (optionally shuffled by seed first);
/// when the family size does not divide `n`, the leftover variables become
/// singleton groups constrained by a plain literal.
pub fn build_group_partitioning(
    cnf: &Cnf,
    input_vars: &[Var],
    family: GroupFamily,
    shuffle_seed: Option<u64>,
) -> Result<Partitioning, PartitionError> {
    let mut vars = input_vars.to_vec();
    let mut sorted = vars.clone();
    sorted.sort_unstable();
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            return Err(PartitionError::DuplicateVariable(pair[0]));
        }
    }
    if let Some(seed) = shuffle_seed {
        vars.shuffle(&mut randutil::prng(seed));
    }
    let g = family.group_size();
    let full = vars.len() / g;
    let groups: Vec<Group> = vars[..full * g]
        .chunks(g)
        .map(|c| Group(c.to_vec()))
        .chain(vars[full * g..].iter().map(|&v| Group(vec![v])))
        .collect();
    if groups.len() >= 63 {
        return Err(PartitionError::TooManyCells { bits: groups.len() });
    }
    Ok(Partitioning::Group(GroupScheme {
        family,
        groups,
        fresh_base: cnf.num_vars(),
    }))
}

/// Builds the cube partitioning over a decomposition set of distinct
/// non-input variables.
pub fn build_cube_partitioning(
    decomposition: &[Var],
    input_vars: &[Var],
) -> Result<Partitioning, PartitionError> {
    if decomposition.is_empty() {
        return Err(PartitionError::EmptyDecompositionSet);
    }
    if decomposition.len() >= 63 {
        return Err(PartitionError::TooManyCells {
            bits: decomposition.len(),
        });
    }
    let mut seen = decomposition.to_vec();
    seen.sort_unstable();
    for pair in seen.windows(2) {
        if pair[0] == pair[1] {
            return Err(PartitionError::DuplicateVariable(pair[0]));
        }
    }
    for &v in decomposition {
        if input_vars.contains(&v) {
            return Err(PartitionError::InputVariable(v));
        }
    }
    Ok(Partitioning::Cubes(CubeScheme {
        vars: decomposition.to_vec(),
    }))
}

/// One violation of the partitioning axioms: an input word whose extension
/// satisfies a number of cells different from one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionViolation {
    pub word: u64,
    pub matching_cells: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub words_checked: u64,
    pub cells_checked: u64,
    /// First few violations, if any.
    pub violations: Vec<PartitionViolation>,
}

const MAX_REPORTED_VIOLATIONS: usize = 16;

/// Exhaustively checks the partitioning axioms against a template-style CNF:
/// every input word's unit-propagation extension must satisfy exactly one
/// cell (coverage and pairwise disjointness together). Intended for small
/// instances; refuses more than 16 inputs.
pub fn validate_cells(
    cnf: &Cnf,
    input_vars: &[Var],
    cells: &[Vec<Clause>],
) -> Result<ValidationReport, CountError> {
    if input_vars.len() > 16 {
        return Err(CountError::TooManyInputs {
            inputs: input_vars.len(),
            max: 16,
        });
    }
    let propagator = Propagator::new(cnf);
    let occurring = crate::counting::occurring_vars(cnf);
    let mut state = PropagationState::new(cnf.num_vars());
    let mut assumptions = Vec::with_capacity(input_vars.len());
    let mut fresh: Vec<Option<bool>> = Vec::new();
    let mut violations = Vec::new();
    for word in 0..1u64 << input_vars.len() {
        assumptions.clear();
        for (i, &v) in input_vars.iter().enumerate() {
            assumptions.push(v.lit(word >> i & 1 == 1));
        }
        if !propagator.propagate_into(&assumptions, &mut state)
            || !crate::counting::all_assigned(&occurring, &state)
        {
            return Err(CountError::InputsDoNotDetermine { word });
        }
        let mut matching = Vec::new();
        for (i, cell) in cells.iter().enumerate() {
            if crate::counting::cell_satisfied_for_validation(
                cell,
                &state,
                cnf.num_vars(),
                &mut fresh,
            )? {
                matching.push(i as u64);
            }
        }
        if matching.len() != 1 && violations.len() < MAX_REPORTED_VIOLATIONS {
            violations.push(PartitionViolation {
                word,
                matching_cells: matching,
            });
        }
    }
    Ok(ValidationReport {
        ok: violations.is_empty(),
        words_checked: 1 << input_vars.len(),
        cells_checked: cells.len() as u64,
        violations,
    })
}

/// [`validate_cells`] over all cells of a partitioning.
pub fn validate_partitioning(
    cnf: &Cnf,
    input_vars: &[Var],
    partitioning: &Partitioning,
) -> Result<ValidationReport, CountError> {
    validate_cells(cnf, input_vars, &partitioning.cells())
}

/// Exact model count of every cell of a partitioning in one enumeration
/// pass. The counts of a valid partitioning of a template CNF sum to `2^n`.
pub fn count_all_cells(
    cnf: &Cnf,
    input_vars: &[Var],
    partitioning: &Partitioning,
) -> Result<Vec<u64>, CountError> {
    count_models_per_cell(cnf, input_vars, &partitioning.cells())
}
