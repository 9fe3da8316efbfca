//! Complete SAT-solver backends with run metrics.
//!
//! Both backends satisfy the same contract: the reported status is correct
//! for `cnf ∧ extra_clauses ∧ assumptions`, satisfying assignments are
//! re-checked by evaluation before being returned, and a timeout yields
//! `TimedOut`, never `Unsat`. Wall time is measured by this harness, so it
//! is present even when an external solver's statistics cannot be parsed.

use std::io::{Read, Write};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

use satpart_core::cnf::{max_var_in, Clause, Cnf, Lit};
use satpart_core::estimator::MetricUnit;
use satpart_core::solver::{SolveOutcome, Solver};
use thiserror::Error;

use crate::dimacs;
use crate::schema::{LedgerRecord, RunStatusTag};

#[derive(Debug, Clone)]
pub struct SolveRequest<'a> {
    pub cnf: &'a Cnf,
    /// Partition constraint clauses, conjoined with the CNF.
    pub extra_clauses: &'a [Clause],
    /// Assumption literals (delivered to external solvers as unit clauses).
    pub assumptions: &'a [Lit],
    pub timeout: Option<Duration>,
    pub task_id: u64,
}

impl<'a> SolveRequest<'a> {
    pub fn plain(cnf: &'a Cnf) -> SolveRequest<'a> {
        SolveRequest {
            cnf,
            extra_clauses: &[],
            assumptions: &[],
            timeout: None,
            task_id: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Sat(Vec<bool>),
    Unsat,
    TimedOut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub task_id: u64,
    pub status: RunStatus,
    pub wall_seconds: f64,
    pub conflicts: Option<u64>,
    pub propagations: Option<u64>,
    pub decisions: Option<u64>,
}

impl RunRecord {
    /// Runtime in the requested unit; `None` when the backend did not report
    /// that counter.
    pub fn metric(&self, unit: MetricUnit) -> Option<f64> {
        match unit {
            MetricUnit::Seconds => Some(self.wall_seconds),
            MetricUnit::Conflicts => self.conflicts.map(|c| c as f64),
            MetricUnit::Propagations => self.propagations.map(|p| p as f64),
        }
    }

    pub fn to_ledger(&self, cell: u64) -> LedgerRecord {
        let (status, model) = match &self.status {
            RunStatus::Sat(model) => (
                RunStatusTag::Sat,
                Some(model.iter().map(|&b| if b { '1' } else { '0' }).collect()),
            ),
            RunStatus::Unsat => (RunStatusTag::Unsat, None),
            RunStatus::TimedOut => (RunStatusTag::TimedOut, None),
        };
        LedgerRecord {
            cell,
            status,
            wall_seconds: self.wall_seconds,
            conflicts: self.conflicts,
            propagations: self.propagations,
            decisions: self.decisions,
            model,
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver backend failed: {0}")]
    Backend(String),
    #[error("satisfying assignment failed the evaluation check: {0}")]
    ModelCheck(String),
}

pub trait Oracle: Sync {
    fn solve(&self, request: &SolveRequest) -> Result<RunRecord, OracleError>;
    fn describe(&self) -> String;
}

/// Evaluates a model against every clause; used to self-check Sat results.
pub fn check_model(model: &[bool], request: &SolveRequest) -> Result<(), String> {
    let value = |lit: Lit| -> bool {
        model
            .get(lit.var().index())
            .map(|&v| lit.apply(v))
            .unwrap_or(false)
    };
    for (i, clause) in request
        .cnf
        .clauses()
        .iter()
        .chain(request.extra_clauses)
        .enumerate()
    {
        if !clause.iter().any(|&l| value(l)) {
            return Err(format!("clause {i} unsatisfied"));
        }
    }
    for &a in request.assumptions {
        if !value(a) {
            return Err(format!("assumption {a} violated"));
        }
    }
    Ok(())
}

fn request_num_vars(request: &SolveRequest) -> u32 {
    let mut n = request.cnf.num_vars().max(max_var_in(request.extra_clauses));
    for a in request.assumptions {
        n = n.max(a.var().number());
    }
    n
}

/// The in-process CDCL solver.
pub struct EmbeddedOracle;

impl Oracle for EmbeddedOracle {
    fn solve(&self, request: &SolveRequest) -> Result<RunRecord, OracleError> {
        let start = Instant::now();
        let mut solver = Solver::from_cnf(request.cnf);
        for clause in request.extra_clauses {
            solver.add_clause(clause);
        }
        let deadline = request.timeout.map(|t| start + t);
        let mut stop = move || deadline.is_some_and(|d| Instant::now() >= d);
        let outcome = solver.solve_with_stop(request.assumptions, &mut stop);
        let wall_seconds = start.elapsed().as_secs_f64();
        let stats = solver.stats();
        let status = match outcome {
            SolveOutcome::Sat => {
                let mut model = solver.model().expect("sat outcome carries a model");
                model.resize(request_num_vars(request) as usize, false);
                check_model(&model, request).map_err(OracleError::ModelCheck)?;
                RunStatus::Sat(model)
            }
            SolveOutcome::Unsat => RunStatus::Unsat,
            SolveOutcome::Interrupted => RunStatus::TimedOut,
        };
        Ok(RunRecord {
            task_id: request.task_id,
            status,
            wall_seconds,
            conflicts: Some(stats.conflicts),
            propagations: Some(stats.propagations),
            decisions: Some(stats.decisions),
        })
    }

    fn describe(&self) -> String {
        "embedded".to_string()
    }
}

/// Adapter for an external solver process: the instance is written to a
/// temporary DIMACS file whose path is appended to the command line.
///
/// Output contract: a line `s SATISFIABLE` or `s UNSATISFIABLE` (exit codes
/// 10/20 are accepted as a fallback); satisfying assignments on `v ` lines
/// terminated by 0. Conflict/propagation/decision counts are scraped from
/// comment lines of the form `c <name>[:] <number> ...` when present.
pub struct ExternalOracle {
    pub command: Vec<String>,
}

impl ExternalOracle {
    pub fn new(command: Vec<String>) -> ExternalOracle {
        ExternalOracle { command }
    }

    fn spawn(&self, cnf_path: &Path) -> Result<Child, OracleError> {
        let mut cmd = Command::new(&self.command[0]);
        cmd.args(&self.command[1..])
            .arg(cnf_path)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null());
        // own process group, so a timeout can take down helper processes too
        #[cfg(unix)]
        {
            use std::os::unix::process::CommandExt;
            cmd.process_group(0);
        }
        cmd.spawn()
            .map_err(|e| OracleError::Backend(format!("spawn {:?}: {e}", self.command[0])))
    }
}

fn terminate(child: &mut Child) {
    #[cfg(unix)]
    {
        let pid = child.id() as i32;
        unsafe {
            libc::kill(-pid, libc::SIGKILL);
        }
    }
    let _ = child.kill();
}

impl Oracle for ExternalOracle {
    fn solve(&self, request: &SolveRequest) -> Result<RunRecord, OracleError> {
        if self.command.is_empty() {
            return Err(OracleError::Backend("empty solver command".into()));
        }
        let mut file = tempfile::Builder::new()
            .prefix("satpart-")
            .suffix(".cnf")
            .tempfile()?;
        let assumption_units: Vec<Clause> = request
            .assumptions
            .iter()
            .map(|&l| vec![l])
            .collect();
        let extra: Vec<Clause> = request
            .extra_clauses
            .iter()
            .cloned()
            .chain(assumption_units)
            .collect();
        dimacs::write_dimacs_with_extra(request.cnf, &extra, &mut file)?;
        file.flush()?;

        let start = Instant::now();
        let mut child = self.spawn(file.path())?;
        let mut stdout_pipe = child.stdout.take().expect("stdout piped");
        let reader = std::thread::spawn(move || {
            let mut buf = String::new();
            let _ = stdout_pipe.read_to_string(&mut buf);
            buf
        });

        let mut timed_out = false;
        let exit_status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if request
                .timeout
                .is_some_and(|t| start.elapsed() >= t)
            {
                timed_out = true;
                terminate(&mut child);
                break child.wait()?;
            }
            std::thread::sleep(Duration::from_millis(2));
        };
        let wall_seconds = start.elapsed().as_secs_f64();
        let output = reader.join().unwrap_or_default();

        let parsed = parse_solver_output(&output);
        let status = match parsed.status {
            Some(ParsedStatus::Sat) => {
                let lits = parsed
                    .model
                    .ok_or_else(|| OracleError::Backend("SAT result without v lines".into()))?;
                let mut model = vec![false; request_num_vars(request) as usize];
                for lit in lits {
                    let var = lit.unsigned_abs() as usize;
                    if var >= 1 && var <= model.len() {
                        model[var - 1] = lit > 0;
                    }
                }
                check_model(&model, request).map_err(OracleError::ModelCheck)?;
                RunStatus::Sat(model)
            }
            Some(ParsedStatus::Unsat) => {
                if timed_out {
                    // an s-line printed by a dying process is still a claim,
                    // but an interrupted run must never report Unsat
                    RunStatus::TimedOut
                } else {
                    RunStatus::Unsat
                }
            }
            None if timed_out => RunStatus::TimedOut,
            None => match exit_status.code() {
                Some(10) => {
                    return Err(OracleError::Backend(
                        "exit code 10 (SAT) without an s line or model".into(),
                    ))
                }
                Some(20) => RunStatus::Unsat,
                code => {
                    return Err(OracleError::Backend(format!(
                        "no status line; exit {code:?}; first output: {:?}",
                        output.lines().next().unwrap_or("")
                    )))
                }
            },
        };
        Ok(RunRecord {
            task_id: request.task_id,
            status,
            wall_seconds,
            conflicts: parsed.conflicts,
            propagations: parsed.propagations,
            decisions: parsed.decisions,
        })
    }

    fn describe(&self) -> String {
        self.command.join(" ")
    }
}

enum ParsedStatus {
    Sat,
    Unsat,
}

struct ParsedOutput {
    status: Option<ParsedStatus>,
    model: Option<Vec<i64>>,
    conflicts: Option<u64>,
    propagations: Option<u64>,
    decisions: Option<u64>,
}

/// First integer following a `name` or `name:` token on a comment line.
fn scrape_counter(line: &str, name: &str) -> Option<u64> {
    let mut tokens = line.split_whitespace();
    tokens.by_ref().find(|tok| {
        tok.trim_end_matches(':').eq_ignore_ascii_case(name)
    })?;
    tokens.find_map(|tok| tok.trim_matches(|c: char| c == ':' || c == ',').parse::<u64>().ok())
}

fn parse_solver_output(output: &str) -> ParsedOutput {
    let mut parsed = ParsedOutput {
        status: None,
        model: None,
        conflicts: None,
        propagations: None,
        decisions: None,
    };
    let mut model_lits: Vec<i64> = Vec::new();
    let mut saw_model_line = false;
    for line in output.lines() {
        if let Some(rest) = line.strip_prefix("s ") {
            match rest.trim() {
                "SATISFIABLE" => parsed.status = Some(ParsedStatus::Sat),
                "UNSATISFIABLE" => parsed.status = Some(ParsedStatus::Unsat),
                _ => {}
            }
        } else if let Some(rest) = line.strip_prefix("v ") {
            saw_model_line = true;
            for tok in rest.split_whitespace() {
                if let Ok(value) = tok.parse::<i64>() {
                    if value != 0 {
                        model_lits.push(value);
                    }
                }
            }
        } else if line.starts_with('c') {
            for (name, slot) in [
                ("conflicts", &mut parsed.conflicts),
                ("propagations", &mut parsed.propagations),
                ("decisions", &mut parsed.decisions),
            ] {
                if slot.is_none() {
                    *slot = scrape_counter(line, name);
                }
            }
        }
    }
    if saw_model_line {
        parsed.model = Some(model_lits);
    }
    parsed
}

/// Builds the configured backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleChoice {
    Embedded,
    External(Vec<String>),
}

impl OracleChoice {
    pub fn build(&self) -> Box<dyn Oracle> {
        match self {
            OracleChoice::Embedded => Box::new(EmbeddedOracle),
            OracleChoice::External(cmd) => Box::new(ExternalOracle::new(cmd.clone())),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            OracleChoice::Embedded => "embedded".to_string(),
            OracleChoice::External(cmd) => cmd.join(" "),
        }
    }
}
