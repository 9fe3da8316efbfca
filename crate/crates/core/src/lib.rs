//! Core algorithms for estimating the hardness of circuit-equivalence SAT
//! instances with respect to a SAT partitioning.
//!
//! The crate is `no_std` (with `alloc`) and contains only the pure
//! algorithmic layer:
//!
//! * [`circuit`] — combinational circuit DAGs, simulation, cones, gluing;
//! * [`cnf`] / [`encode`] — clause databases and Tseytin encodings
//!   (template CNF and miter CNF);
//! * [`propagate`] / [`counting`] — unit propagation and propagation-based
//!   exact/estimated model counting over input assignments;
//! * [`sortgen`] — oblivious sorting circuits (bubble, selection, pancake)
//!   used as scalable equivalence-checking benchmarks;
//! * [`solver`] — a complete CDCL SAT solver with run metrics;
//! * [`partition`] — SAT partitionings built from grouped input constraints
//!   or from cubes over a decomposition set;
//! * [`balance`] — Chernoff-bounded estimation of gate output probabilities
//!   and decomposition-set selection;
//! * [`estimator`] — Monte-Carlo hardness estimation and accuracy bounds.
//!
//! File formats, subprocess oracles, the job runner and the CLI live in the
//! companion `satpart` crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod balance;
pub mod circuit;
pub mod cnf;
pub mod counting;
pub mod encode;
pub mod estimator;
pub mod partition;
pub mod propagate;
pub mod randutil;
pub mod solver;
pub mod sortgen;
