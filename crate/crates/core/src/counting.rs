//! Model counting over input assignments via unit propagation.
//!
//! For template-style CNFs the input variables determine every other
//! variable under unit propagation, so the models can be counted exactly by
//! enumerating input words, or estimated by sampling them.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::balance::samples_needed;
use crate::cnf::{Clause, Cnf, Lit, Var};
use crate::propagate::{PropagationState, Propagator};
use crate::randutil;

/// Exhaustive enumeration is refused above this many input variables.
pub const MAX_EXACT_INPUTS: usize = 26;

#[derive(Debug, Clone, PartialEq)]
pub enum CountError {
    TooManyInputs { inputs: usize, max: usize },
    /// Propagation from a full input assignment left a clause undecided, so
    /// the inputs do not determine all variables and enumeration would be
    /// unsound.
    InputsDoNotDetermine { word: u64 },
    BadParams(&'static str),
}

impl fmt::Display for CountError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountError::TooManyInputs { inputs, max } => {
                write!(f, "{inputs} input variables exceed the exact-count limit {max}")
            }
            CountError::InputsDoNotDetermine { word } => write!(
                f,
                "input word {word} does not determine all variables under unit propagation"
            ),
            CountError::BadParams(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for CountError {}

/// An exact or estimated model count of one partitioning cell.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelCount {
    Exact(u64),
    Estimated {
        /// `fraction * 2^n`
        value: f64,
        /// fraction of sampled input words whose extension satisfies the cell
        fraction: f64,
        epsilon: f64,
        delta: f64,
        samples: u64,
    },
}

impl ModelCount {
    pub fn value(&self) -> f64 {
        match self {
            ModelCount::Exact(v) => *v as f64,
            ModelCount::Estimated { value, .. } => *value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountMode {
    Exact,
    Estimate { epsilon: f64, delta: f64, seed: u64 },
}

fn word_assumptions(input_vars: &[Var], word: u64, buf: &mut Vec<Lit>) {
    buf.clear();
    for (i, &v) in input_vars.iter().enumerate() {
        buf.push(v.lit(word >> i & 1 == 1));
    }
}

/// Variables occurring in at least one clause. A conflict-free propagation
/// fixpoint that assigns all of them satisfies every clause; an unassigned
/// occurring variable means the inputs do not determine the formula.
pub(crate) fn occurring_vars(cnf: &Cnf) -> Vec<Var> {
    let mut occurs = alloc::vec![false; cnf.num_vars() as usize];
    for clause in cnf.clauses() {
        for lit in clause {
            occurs[lit.var().index()] = true;
        }
    }
    occurs
        .iter()
        .enumerate()
        .filter(|(_, &o)| o)
        .map(|(i, _)| Var::from_index(i))
        .collect()
}

pub(crate) fn all_assigned(vars: &[Var], state: &PropagationState) -> bool {
    vars.iter().all(|&v| state.value(v).is_some())
}

/// Exact model count of a CNF whose variables are determined by the given
/// input variables: enumerates all `2^n` input words and counts those whose
/// unit-propagation extension is conflict-free and satisfies every clause.
pub fn enumerate_input_models(cnf: &Cnf, input_vars: &[Var]) -> Result<u64, CountError> {
    if input_vars.len() > MAX_EXACT_INPUTS {
        return Err(CountError::TooManyInputs {
            inputs: input_vars.len(),
            max: MAX_EXACT_INPUTS,
        });
    }
    let propagator = Propagator::new(cnf);
    let occurring = occurring_vars(cnf);
    let mut state = PropagationState::new(cnf.num_vars());
    let mut assumptions = Vec::with_capacity(input_vars.len());
    let mut count = 0u64;
    for word in 0..1u64 << input_vars.len() {
        word_assumptions(input_vars, word, &mut assumptions);
        if !propagator.propagate_into(&assumptions, &mut state) {
            continue;
        }
        if !all_assigned(&occurring, &state) {
            return Err(CountError::InputsDoNotDetermine { word });
        }
        count += 1;
    }
    Ok(count)
}

/// Evaluates one cell's clause set against a total extension of the base
/// CNF. Cell clauses may mention fresh auxiliary variables above the base
/// variable range; those are derived by local unit propagation.
pub(crate) fn cell_satisfied_for_validation(
    cell: &[Clause],
    state: &PropagationState,
    base_vars: u32,
    fresh: &mut Vec<Option<bool>>,
) -> Result<bool, CountError> {
    cell_satisfied(cell, state, base_vars, fresh, base_vars + 1)
}

fn cell_satisfied(
    cell: &[Clause],
    state: &PropagationState,
    base_vars: u32,
    fresh: &mut Vec<Option<bool>>,
    fresh_lo: u32,
) -> Result<bool, CountError> {
    for slot in fresh.iter_mut() {
        *slot = None;
    }
    let lit_value = |lit: Lit, fresh: &Vec<Option<bool>>| -> Option<bool> {
        let n = lit.var().number();
        if n <= base_vars {
            state.lit_value(lit)
        } else {
            fresh
                .get((n - fresh_lo) as usize)
                .copied()
                .flatten()
                .map(|v| lit.apply(v))
        }
    };
    loop {
        let mut progress = false;
        let mut all_satisfied = true;
        for clause in cell {
            let mut satisfied = false;
            let mut unassigned: Option<Lit> = None;
            let mut unassigned_count = 0;
            for &lit in clause {
                match lit_value(lit, fresh) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        unassigned_count += 1;
                        unassigned = Some(lit);
                    }
                }
            }
            if satisfied {
                continue;
            }
            all_satisfied = false;
            match unassigned_count {
                0 => return Ok(false),
                1 => {
                    let lit = unassigned.expect("counted one unassigned literal");
                    let n = lit.var().number();
                    debug_assert!(n > base_vars, "base extension must be total");
                    let idx = (n - fresh_lo) as usize;
                    if fresh.len() <= idx {
                        fresh.resize(idx + 1, None);
                    }
                    fresh[idx] = Some(lit.is_positive());
                    progress = true;
                }
                _ => {}
            }
        }
        if all_satisfied {
            return Ok(true);
        }
        if !progress {
            // a clause is stuck with ≥2 unassigned literals
            return Err(CountError::BadParams(
                "cell clauses are not determined by the base extension",
            ));
        }
    }
}

/// Exact model counts of many cells in one enumeration pass over the input
/// words: each word is extended once by unit propagation, then every cell's
/// clause set is evaluated against the extension.
pub fn count_models_per_cell(
    cnf: &Cnf,
    input_vars: &[Var],
    cells: &[Vec<Clause>],
) -> Result<Vec<u64>, CountError> {
    if input_vars.len() > MAX_EXACT_INPUTS {
        return Err(CountError::TooManyInputs {
            inputs: input_vars.len(),
            max: MAX_EXACT_INPUTS,
        });
    }
    let propagator = Propagator::new(cnf);
    let occurring = occurring_vars(cnf);
    let mut state = PropagationState::new(cnf.num_vars());
    let mut assumptions = Vec::with_capacity(input_vars.len());
    let mut fresh: Vec<Option<bool>> = Vec::new();
    let fresh_lo = cnf.num_vars() + 1;
    let mut counts = alloc::vec![0u64; cells.len()];
    for word in 0..1u64 << input_vars.len() {
        word_assumptions(input_vars, word, &mut assumptions);
        if !propagator.propagate_into(&assumptions, &mut state) {
            continue;
        }
        if !all_assigned(&occurring, &state) {
            return Err(CountError::InputsDoNotDetermine { word });
        }
        for (i, cell) in cells.iter().enumerate() {
            if cell_satisfied(cell, &state, cnf.num_vars(), &mut fresh, fresh_lo)? {
                counts[i] += 1;
            }
        }
    }
    Ok(counts)
}

/// Model count of a single cell, exact (enumeration) or estimated by
/// sampling input words uniformly. The estimate is `fraction * 2^n`, with
/// the fraction an `(ε, δ)`-approximation of the true cell probability.
pub fn count_cell_models(
    cnf: &Cnf,
    input_vars: &[Var],
    cell: &[Clause],
    mode: CountMode,
) -> Result<ModelCount, CountError> {
    match mode {
        CountMode::Exact => {
            let counts = count_models_per_cell(cnf, input_vars, &[cell.to_vec()])?;
            Ok(ModelCount::Exact(counts[0]))
        }
        CountMode::Estimate { epsilon, delta, seed } => {
            let samples = samples_needed(epsilon, delta)
                .map_err(|_| CountError::BadParams("epsilon and delta must lie in (0,1)"))?;
            let propagator = Propagator::new(cnf);
            let occurring = occurring_vars(cnf);
            let mut state = PropagationState::new(cnf.num_vars());
            let mut assumptions = Vec::with_capacity(input_vars.len());
            let mut fresh: Vec<Option<bool>> = Vec::new();
            let fresh_lo = cnf.num_vars() + 1;
            let mut rng = randutil::prng(seed);
            let mut hits = 0u64;
            for _ in 0..samples {
                assumptions.clear();
                let mut word = 0u64;
                for (i, &v) in input_vars.iter().enumerate() {
                    let bit = rng.random::<bool>();
                    assumptions.push(v.lit(bit));
                    if i < 64 {
                        word |= u64::from(bit) << i;
                    }
                }
                if !propagator.propagate_into(&assumptions, &mut state) {
                    continue;
                }
                if !all_assigned(&occurring, &state) {
                    return Err(CountError::InputsDoNotDetermine { word });
                }
                if cell_satisfied(cell, &state, cnf.num_vars(), &mut fresh, fresh_lo)? {
                    hits += 1;
                }
            }
            let fraction = hits as f64 / samples as f64;
            let scale = libm::exp2(input_vars.len() as f64);
            Ok(ModelCount::Estimated {
                value: fraction * scale,
                fraction,
                epsilon,
                delta,
                samples,
            })
        }
    }
}
