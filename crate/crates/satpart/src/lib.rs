//! IO, oracles and orchestration around `satpart-core`.
//!
//! * [`aiger`] — ASCII AIGER circuit files, with an `ext-ops` comment
//!   section for gates outside the AND/inverter basis;
//! * [`dimacs`] — DIMACS CNF reading and writing;
//! * [`schema`] — the JSON sidecar formats (variable maps, partitioning
//!   schemes, balance reports, run ledgers, job summaries);
//! * [`oracle`] — complete SAT-solver backends with run metrics: the
//!   embedded CDCL solver and an external-process adapter;
//! * [`jobs`] — the parallel, resumable solve-all / estimate runner;
//! * [`report`] — CSV emission for per-cell records and the sample-means
//!   experiment;
//! * [`cli`] — the `satpart` command-line tool.

pub mod aiger;
pub mod cli;
pub mod dimacs;
pub mod jobs;
pub mod oracle;
pub mod report;
pub mod schema;
