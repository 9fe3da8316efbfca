//! Literals, clauses and clause databases.
//!
//! Variables are 1-based, matching the DIMACS convention used by every
//! external tool this crate talks to. A [`Lit`] packs the variable and its
//! sign into a single word so literal-indexed tables stay dense.

use alloc::vec::Vec;
use core::fmt;
use core::num::NonZeroU32;
use core::ops::Not;

/// A propositional variable, numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Var(NonZeroU32);

impl Var {
    pub fn new(number: u32) -> Var {
        Var(NonZeroU32::new(number).expect("variable numbers start at 1"))
    }

    /// 1-based number as written in DIMACS.
    pub fn number(self) -> u32 {
        self.0.get()
    }

    /// 0-based index for dense tables.
    pub fn index(self) -> usize {
        (self.0.get() - 1) as usize
    }

    pub fn from_index(index: usize) -> Var {
        Var::new(index as u32 + 1)
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }

    pub fn lit(self, positive: bool) -> Lit {
        Lit::new(self, positive)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// A literal: a variable together with a sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.number() << 1 | u32::from(!positive))
    }

    pub fn var(self) -> Var {
        Var::new(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense 0-based code, distinct per (variable, sign) pair.
    pub fn code(self) -> usize {
        (self.0 - 2) as usize
    }

    pub fn to_dimacs(self) -> i32 {
        let v = (self.0 >> 1) as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(value: i32) -> Result<Lit, CnfError> {
        if value == 0 {
            return Err(CnfError::ZeroLiteral);
        }
        Ok(Lit::new(Var::new(value.unsigned_abs()), value > 0))
    }

    /// Truth value of this literal under an assignment of its variable.
    pub fn apply(self, var_value: bool) -> bool {
        var_value == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

pub type Clause = Vec<Lit>;

/// A CNF formula: a clause database over variables `1..=num_vars`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl Cnf {
    pub fn new(num_vars: u32) -> Cnf {
        Cnf {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Allocates a fresh variable above all existing ones.
    pub fn fresh_var(&mut self) -> Var {
        self.num_vars += 1;
        Var::new(self.num_vars)
    }

    /// Raises `num_vars` so that `var` is in range.
    pub fn ensure_var(&mut self, var: Var) {
        self.num_vars = self.num_vars.max(var.number());
    }

    pub fn add_clause(&mut self, clause: Clause) -> Result<(), CnfError> {
        if clause.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        for lit in &clause {
            if lit.var().number() > self.num_vars {
                return Err(CnfError::VarOutOfRange {
                    var: lit.var().number(),
                    num_vars: self.num_vars,
                });
            }
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Adds a clause, widening the variable range if needed.
    pub fn push_clause(&mut self, clause: Clause) -> Result<(), CnfError> {
        if clause.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        for lit in &clause {
            self.ensure_var(lit.var());
        }
        self.clauses.push(clause);
        Ok(())
    }
}

/// Largest variable number appearing in a clause slice, or 0 when empty.
pub fn max_var_in(clauses: &[Clause]) -> u32 {
    clauses
        .iter()
        .flat_map(|c| c.iter())
        .map(|l| l.var().number())
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CnfError {
    EmptyClause,
    ZeroLiteral,
    VarOutOfRange { var: u32, num_vars: u32 },
}

impl fmt::Display for CnfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CnfError::EmptyClause => write!(f, "empty clause"),
            CnfError::ZeroLiteral => write!(f, "literal 0 is reserved as the clause terminator"),
            CnfError::VarOutOfRange { var, num_vars } => {
                write!(f, "variable {var} out of range (formula has {num_vars})")
            }
        }
    }
}

impl core::error::Error for CnfError {}

/// Shorthand for building clauses from DIMACS-style integers in tests and
/// internal tables. Panics on 0.
pub fn clause_from_dimacs(lits: &[i32]) -> Clause {
    lits.iter()
        .map(|&v| Lit::from_dimacs(v).expect("nonzero literal"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lit_codes_are_dense_and_invertible() {
        let x = Var::new(1);
        let y = Var::new(2);
        assert_eq!(x.positive().code(), 0);
        assert_eq!(x.negative().code(), 1);
        assert_eq!(y.positive().code(), 2);
        assert_eq!((!x.positive()), x.negative());
        assert_eq!(Lit::from_dimacs(-7).unwrap().to_dimacs(), -7);
        assert!(Lit::from_dimacs(0).is_err());
    }

    #[test]
    fn clause_validation() {
        let mut cnf = Cnf::new(2);
        assert_eq!(cnf.add_clause(Vec::new()), Err(CnfError::EmptyClause));
        assert!(cnf.add_clause(clause_from_dimacs(&[1, -2])).is_ok());
        assert_eq!(
            cnf.add_clause(clause_from_dimacs(&[3])),
            Err(CnfError::VarOutOfRange { var: 3, num_vars: 2 })
        );
        cnf.push_clause(clause_from_dimacs(&[3])).unwrap();
        assert_eq!(cnf.num_vars(), 3);
    }
}
