//! Unit propagation to fixpoint over an immutable clause set.
//!
//! On template CNFs, propagation from a full input assignment reproduces the
//! circuit interpretation: every cone variable receives exactly its simulated
//! value and no conflict arises. That property is what the counting and
//! validation code paths build on.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::cnf::{Clause, Cnf, Lit, Var};

/// Outcome of propagation: either a consistent partial assignment (the
/// fixpoint) or a conflict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropagationResult {
    Consistent(Assignment),
    Conflict,
}

impl PropagationResult {
    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            PropagationResult::Consistent(a) => Some(a),
            PropagationResult::Conflict => None,
        }
    }

    pub fn is_conflict(&self) -> bool {
        matches!(self, PropagationResult::Conflict)
    }
}

/// A partial assignment indexed by variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new(num_vars: u32) -> Assignment {
        Assignment {
            values: vec![None; num_vars as usize],
        }
    }

    pub fn value(&self, var: Var) -> Option<bool> {
        self.values.get(var.index()).copied().flatten()
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.value(lit.var()).map(|v| lit.apply(v))
    }

    pub fn assigned_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }
}

/// Reusable propagation engine over one clause set. Building the occurrence
/// lists is done once; each `propagate` call owns its assignment state, so a
/// shared `Propagator` can serve many concurrent callers.
pub struct Propagator {
    num_vars: u32,
    clauses: Vec<Clause>,
    /// For each literal code, the clauses containing that literal.
    occurrences: Vec<Vec<u32>>,
    /// Unit clauses, used as propagation seeds.
    units: Vec<Lit>,
}

impl Propagator {
    pub fn new(cnf: &Cnf) -> Propagator {
        Propagator::with_clauses(cnf.num_vars(), cnf.clauses().to_vec())
    }

    pub fn with_clauses(num_vars: u32, clauses: Vec<Clause>) -> Propagator {
        let mut occurrences = vec![Vec::new(); num_vars as usize * 2];
        let mut units = Vec::new();
        for (i, clause) in clauses.iter().enumerate() {
            if clause.len() == 1 {
                units.push(clause[0]);
            }
            for &lit in clause {
                occurrences[lit.code()].push(i as u32);
            }
        }
        Propagator {
            num_vars,
            clauses,
            occurrences,
            units,
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Runs unit propagation under the given assumptions.
    pub fn propagate(&self, assumptions: &[Lit]) -> PropagationResult {
        let mut state = PropagationState::new(self.num_vars);
        if self.propagate_into(assumptions, &mut state) {
            PropagationResult::Consistent(Assignment {
                values: state.values,
            })
        } else {
            PropagationResult::Conflict
        }
    }

    /// Propagation into a reusable state buffer; returns false on conflict.
    /// The state is reset on entry, so one buffer can serve a whole
    /// enumeration loop without reallocation.
    pub fn propagate_into(&self, assumptions: &[Lit], state: &mut PropagationState) -> bool {
        state.reset();
        for &lit in self.units.iter().chain(assumptions) {
            if !state.assign(lit) {
                return false;
            }
        }
        while let Some(lit) = state.queue.pop_front() {
            // clauses where `lit` just became false
            for &ci in &self.occurrences[(!lit).code()] {
                let clause = &self.clauses[ci as usize];
                let mut satisfied = false;
                let mut unassigned: Option<Lit> = None;
                let mut unassigned_count = 0;
                for &l in clause {
                    match state.lit_value(l) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            unassigned_count += 1;
                            if unassigned_count > 1 {
                                break;
                            }
                            unassigned = Some(l);
                        }
                    }
                }
                if satisfied || unassigned_count > 1 {
                    continue;
                }
                match unassigned {
                    None => return false,
                    Some(l) => {
                        if !state.assign(l) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Scratch state for [`Propagator::propagate_into`].
pub struct PropagationState {
    values: Vec<Option<bool>>,
    trail: Vec<Var>,
    queue: VecDeque<Lit>,
}

impl PropagationState {
    pub fn new(num_vars: u32) -> PropagationState {
        PropagationState {
            values: vec![None; num_vars as usize],
            trail: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn reset(&mut self) {
        for var in self.trail.drain(..) {
            self.values[var.index()] = None;
        }
        self.queue.clear();
    }

    fn assign(&mut self, lit: Lit) -> bool {
        let slot = &mut self.values[lit.var().index()];
        match *slot {
            Some(v) => lit.apply(v),
            None => {
                *slot = Some(lit.is_positive());
                self.trail.push(lit.var());
                self.queue.push_back(lit);
                true
            }
        }
    }

    pub fn value(&self, var: Var) -> Option<bool> {
        self.values.get(var.index()).copied().flatten()
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.value(lit.var()).map(|v| lit.apply(v))
    }

    pub fn assigned_count(&self) -> usize {
        self.trail.len()
    }
}

/// One-shot unit propagation over a CNF under assumptions.
pub fn unit_propagate(cnf: &Cnf, assumptions: &[Lit]) -> PropagationResult {
    Propagator::new(cnf).propagate(assumptions)
}
