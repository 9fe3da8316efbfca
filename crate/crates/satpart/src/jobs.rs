//! Parallel, resumable solve-all / estimate jobs.
//!
//! A job solves a set of partitioning cells against one CNF. Every finished
//! cell is appended to a JSONL ledger and flushed before the next record, so
//! a killed job loses at most the cell in flight. Restarting with the same
//! configuration (checked by hash) skips completed cells and reproduces the
//! same final estimate; the chosen cells depend only on `(s, N, seed)`.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use satpart_core::cnf::Cnf;
use satpart_core::estimator::{
    estimate_from_observations, sample_cells, MetricUnit, Observation,
};
use satpart_core::partition::Partitioning;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dimacs;
use crate::oracle::{OracleChoice, SolveRequest};
use crate::schema::{
    read_json, write_json, EstimateSet, JobFile, LedgerRecord, RunStatusTag, SchemeFile,
    SummaryFile, UnitEstimate,
};

/// Cap on materializing `0..s` cell indices for solve-all runs.
const MAX_SOLVE_ALL_CELLS: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSize {
    All,
    N(u64),
}

impl SampleSize {
    fn describe(&self) -> String {
        match self {
            SampleSize::All => "all".to_string(),
            SampleSize::N(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub cnf_path: PathBuf,
    /// Scheme file; `None` solves the whole instance as a single cell.
    pub scheme_path: Option<PathBuf>,
    pub oracle: OracleChoice,
    pub parallelism: usize,
    pub sample: SampleSize,
    pub seed: u64,
    pub timeout: Option<Duration>,
    pub expect_unsat: bool,
    pub out_dir: PathBuf,
}

#[derive(Debug, Error)]
pub enum JobError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cnf: {0}")]
    Dimacs(#[from] crate::dimacs::DimacsError),
    #[error("scheme: {0}")]
    Schema(#[from] crate::schema::SchemaError),
    #[error("out dir belongs to a different configuration (hash {found}, expected {expected}); use a fresh directory")]
    ConfigChanged { expected: String, found: String },
    #[error("ledger line {line} is corrupt: {msg}")]
    CorruptLedger { line: usize, msg: String },
    #[error("{0}")]
    BadConfig(String),
    #[error("sampling: {0}")]
    Estimate(#[from] satpart_core::estimator::EstimateError),
}

#[derive(Debug)]
pub struct JobOutcome {
    pub summary: SummaryFile,
    /// Ledger records of the planned cells, keyed by cell index.
    pub records: BTreeMap<u64, LedgerRecord>,
    /// Whether every planned cell is solved.
    pub completed: bool,
    /// Per-cell oracle failures (cell, message); failed cells stay pending.
    pub failures: Vec<(u64, String)>,
}

pub fn ledger_path(out_dir: &Path) -> PathBuf {
    out_dir.join("ledger.jsonl")
}

pub fn summary_path(out_dir: &Path) -> PathBuf {
    out_dir.join("summary.json")
}

pub fn cells_csv_path(out_dir: &Path) -> PathBuf {
    out_dir.join("cells.csv")
}

pub fn job_file_path(out_dir: &Path) -> PathBuf {
    out_dir.join("job.json")
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

/// Loads a ledger, tolerating a truncated final line (the write that a kill
/// interrupted). Any earlier corruption is an error. On duplicate cells the
/// first record wins.
pub fn load_ledger(path: &Path) -> Result<BTreeMap<u64, LedgerRecord>, JobError> {
    let mut records = BTreeMap::new();
    if !path.exists() {
        return Ok(records);
    }
    let reader = BufReader::new(File::open(path)?);
    let lines: Vec<String> = reader.lines().collect::<Result<_, _>>()?;
    let last = lines.len();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<LedgerRecord>(line) {
            Ok(rec) => {
                records.entry(rec.cell).or_insert(rec);
            }
            Err(e) if i + 1 == last => {
                // partial final line from an interrupted append
                let _ = e;
            }
            Err(e) => {
                return Err(JobError::CorruptLedger {
                    line: i + 1,
                    msg: e.to_string(),
                })
            }
        }
    }
    Ok(records)
}

/// Aggregates hardness estimates from ledger records of the planned cells.
/// Records are consumed in ascending cell order, so replaying a ledger
/// reconstructs an identical estimate. A unit's estimate is present only
/// when every record reports that counter.
pub fn estimates_from_records(
    records: &BTreeMap<u64, LedgerRecord>,
    planned: &[u64],
    population: u64,
) -> EstimateSet {
    let mut sorted: Vec<u64> = planned.to_vec();
    sorted.sort_unstable();
    let censored = sorted
        .iter()
        .filter(|c| {
            records
                .get(c)
                .is_some_and(|r| r.status == RunStatusTag::TimedOut)
        })
        .count() as u64;
    let complete = sorted.iter().all(|c| records.contains_key(c));
    if !complete || sorted.is_empty() {
        return EstimateSet {
            seconds: None,
            conflicts: None,
            propagations: None,
        };
    }
    let collect = |f: &dyn Fn(&LedgerRecord) -> Option<f64>| -> Option<Vec<Observation>> {
        sorted
            .iter()
            .map(|&cell| {
                f(&records[&cell]).map(|value| Observation { cell, value })
            })
            .collect()
    };
    let build = |unit: MetricUnit,
                 f: &dyn Fn(&LedgerRecord) -> Option<f64>|
     -> Option<UnitEstimate> {
        let obs = collect(f)?;
        estimate_from_observations(&obs, population, unit, censored)
            .ok()
            .map(UnitEstimate::new)
    };
    EstimateSet {
        seconds: build(MetricUnit::Seconds, &|r| Some(r.wall_seconds)),
        conflicts: build(MetricUnit::Conflicts, &|r| r.conflicts.map(|c| c as f64)),
        propagations: build(MetricUnit::Propagations, &|r| {
            r.propagations.map(|p| p as f64)
        }),
    }
}

/// The cells a configuration plans to solve; deterministic per config.
pub fn planned_cells(
    partitioning: &Partitioning,
    sample: SampleSize,
    seed: u64,
) -> Result<Vec<u64>, JobError> {
    let s = partitioning.size();
    match sample {
        SampleSize::All => {
            if s > MAX_SOLVE_ALL_CELLS {
                return Err(JobError::BadConfig(format!(
                    "solve-all over {s} cells exceeds the {MAX_SOLVE_ALL_CELLS} cap; use sampling"
                )));
            }
            Ok((0..s).collect())
        }
        SampleSize::N(n) => Ok(sample_cells(s, n, seed)?),
    }
}

struct LoadedJob {
    cnf: Cnf,
    partitioning: Partitioning,
    config_hash: String,
    job_file: JobFile,
}

fn load_job(config: &JobConfig) -> Result<LoadedJob, JobError> {
    if config.parallelism == 0 {
        return Err(JobError::BadConfig("parallelism must be at least 1".into()));
    }
    let cnf_bytes = std::fs::read(&config.cnf_path)?;
    let cnf = dimacs::read_dimacs(cnf_bytes.as_slice())?;
    let cnf_sha = sha256_hex(&cnf_bytes);
    let (partitioning, scheme_sha) = match &config.scheme_path {
        None => (Partitioning::Whole, None),
        Some(path) => {
            let bytes = std::fs::read(path)?;
            let scheme: SchemeFile = serde_json::from_slice(&bytes)
                .map_err(crate::schema::SchemaError::from)?;
            (scheme.partitioning, Some(sha256_hex(&bytes)))
        }
    };
    let canonical = format!(
        "cnf={cnf_sha};scheme={};oracle={};sample={};seed={};timeout={:?};expect_unsat={}",
        scheme_sha.as_deref().unwrap_or("none"),
        config.oracle.describe(),
        config.sample.describe(),
        config.seed,
        config.timeout,
        config.expect_unsat,
    );
    let config_hash = sha256_hex(canonical.as_bytes());
    let job_file = JobFile {
        config_hash: config_hash.clone(),
        cnf_sha256: cnf_sha,
        scheme_sha256: scheme_sha,
        oracle: config.oracle.describe(),
        sample: config.sample.describe(),
        seed: config.seed,
        timeout_seconds: config.timeout.map(|t| t.as_secs_f64()),
        expect_unsat: config.expect_unsat,
    };
    Ok(LoadedJob {
        cnf,
        partitioning,
        config_hash,
        job_file,
    })
}

pub fn run_job(config: &JobConfig) -> Result<JobOutcome, JobError> {
    run_job_with_cancel(config, None)
}

/// Runs a job. `cancel`, when present, is polled with the number of cells
/// completed in this run; returning true abandons the job immediately (the
/// ledger keeps what finished), which is also how the tests model a kill.
pub fn run_job_with_cancel(
    config: &JobConfig,
    cancel: Option<&(dyn Fn(u64) -> bool + Sync)>,
) -> Result<JobOutcome, JobError> {
    let started = Instant::now();
    let loaded = load_job(config)?;
    std::fs::create_dir_all(&config.out_dir)?;

    let job_path = job_file_path(&config.out_dir);
    if job_path.exists() {
        let existing: JobFile = read_json(&job_path)?;
        if existing.config_hash != loaded.config_hash {
            return Err(JobError::ConfigChanged {
                expected: loaded.config_hash,
                found: existing.config_hash,
            });
        }
    } else {
        write_json(&loaded.job_file, &job_path)?;
    }

    let planned = planned_cells(&loaded.partitioning, config.sample, config.seed)?;
    let ledger = ledger_path(&config.out_dir);
    let mut records = load_ledger(&ledger)?;
    let pending: Vec<u64> = planned
        .iter()
        .copied()
        .filter(|c| !records.contains_key(c))
        .collect();
    let resumed = (planned.len() - pending.len()) as u64;

    let oracle = config.oracle.build();
    let stop = AtomicBool::new(false);
    let next = AtomicUsize::new(0);
    let mut failures: Vec<(u64, String)> = Vec::new();
    let mut solved_now = 0u64;
    let mut ledger_file = OpenOptions::new().create(true).append(true).open(&ledger)?;
    let mut append_error: Option<std::io::Error> = None;

    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(u64, Result<crate::oracle::RunRecord, String>)>();
        for _ in 0..config.parallelism {
            let tx = tx.clone();
            let pending = &pending;
            let stop = &stop;
            let next = &next;
            let cnf = &loaded.cnf;
            let partitioning = &loaded.partitioning;
            let oracle = &*oracle;
            scope.spawn(move || loop {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= pending.len() {
                    break;
                }
                let cell = pending[i];
                let extra = partitioning.cell(cell);
                let request = SolveRequest {
                    cnf,
                    extra_clauses: &extra,
                    assumptions: &[],
                    timeout: config.timeout,
                    task_id: cell,
                };
                let result = oracle.solve(&request).map_err(|e| e.to_string());
                if tx.send((cell, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut done = 0u64;
        for (cell, result) in rx {
            match result {
                Ok(run) => {
                    let record = run.to_ledger(cell);
                    match serde_json::to_string(&record) {
                        Ok(line) => {
                            if let Err(e) = writeln!(ledger_file, "{line}")
                                .and_then(|_| ledger_file.flush())
                            {
                                append_error = Some(e);
                                stop.store(true, Ordering::Relaxed);
                                break;
                            }
                        }
                        Err(e) => {
                            append_error = Some(e.into());
                            stop.store(true, Ordering::Relaxed);
                            break;
                        }
                    }
                    records.insert(cell, record);
                    solved_now += 1;
                }
                Err(msg) => failures.push((cell, msg)),
            }
            done += 1;
            if cancel.is_some_and(|c| c(done)) {
                stop.store(true, Ordering::Relaxed);
                break;
            }
        }
    });
    if let Some(e) = append_error {
        return Err(JobError::Io(e));
    }

    let completed =
        failures.is_empty() && planned.iter().all(|c| records.contains_key(c));
    let population = loaded.partitioning.size();
    let estimates = estimates_from_records(&records, &planned, population);

    let planned_records: BTreeMap<u64, LedgerRecord> = planned
        .iter()
        .filter_map(|c| records.get(c).map(|r| (*c, r.clone())))
        .collect();
    let sat_cells: Vec<u64> = planned_records
        .values()
        .filter(|r| r.status == RunStatusTag::Sat)
        .map(|r| r.cell)
        .collect();
    let summary = SummaryFile {
        config_hash: loaded.config_hash,
        population,
        planned: planned.len() as u64,
        solved_now,
        resumed,
        wall_seconds: started.elapsed().as_secs_f64(),
        cpu_seconds: planned_records.values().map(|r| r.wall_seconds).sum(),
        sat_cells,
        unsat_cells: planned_records
            .values()
            .filter(|r| r.status == RunStatusTag::Unsat)
            .count() as u64,
        timed_out_cells: planned_records
            .values()
            .filter(|r| r.status == RunStatusTag::TimedOut)
            .count() as u64,
        estimates,
    };
    write_json(&summary, &summary_path(&config.out_dir))?;
    {
        let mut csv = std::io::BufWriter::new(File::create(cells_csv_path(&config.out_dir))?);
        crate::report::write_cells_csv(&planned_records, &mut csv)?;
        csv.flush()?;
    }
    Ok(JobOutcome {
        summary,
        records: planned_records,
        completed,
        failures,
    })
}

/// Per-cell runtime values of a fully solved partitioning, in cell order.
/// This is the population that the sample-means experiment resamples.
pub fn population_values(
    records: &BTreeMap<u64, LedgerRecord>,
    unit: MetricUnit,
) -> Result<Vec<f64>, JobError> {
    records
        .values()
        .map(|r| match unit {
            MetricUnit::Seconds => Some(r.wall_seconds),
            MetricUnit::Conflicts => r.conflicts.map(|c| c as f64),
            MetricUnit::Propagations => r.propagations.map(|p| p as f64),
        }
        .ok_or_else(|| {
            JobError::BadConfig(format!(
                "cell {} has no {} counter in the ledger",
                r.cell,
                unit.name()
            ))
        }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use satpart_core::cnf::clause_from_dimacs;

    fn write_cnf(dir: &Path, name: &str, cnf: &Cnf) -> PathBuf {
        let path = dir.join(name);
        crate::dimacs::write_dimacs_file(cnf, &path).unwrap();
        path
    }

    fn tiny_config(dir: &Path) -> JobConfig {
        let mut cnf = Cnf::new(3);
        cnf.add_clause(clause_from_dimacs(&[1, 2])).unwrap();
        cnf.add_clause(clause_from_dimacs(&[-1, 3])).unwrap();
        let cnf_path = write_cnf(dir, "tiny.cnf", &cnf);
        JobConfig {
            cnf_path,
            scheme_path: None,
            oracle: OracleChoice::Embedded,
            parallelism: 2,
            sample: SampleSize::All,
            seed: 1,
            timeout: None,
            expect_unsat: false,
            out_dir: dir.join("job"),
        }
    }

    #[test]
    fn whole_job_runs_and_resumes_idempotently() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let first = run_job(&config).unwrap();
        assert!(first.completed);
        assert_eq!(first.summary.solved_now, 1);
        assert_eq!(first.summary.sat_cells, vec![0]);
        let second = run_job(&config).unwrap();
        assert!(second.completed);
        assert_eq!(second.summary.solved_now, 0);
        assert_eq!(second.summary.resumed, 1);
        assert_eq!(
            first.summary.estimates.conflicts.as_ref().unwrap().stats.total_estimate,
            second.summary.estimates.conflicts.as_ref().unwrap().stats.total_estimate,
        );
    }

    #[test]
    fn ledger_replay_reconstructs_the_estimate() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let outcome = run_job(&config).unwrap();
        let records = load_ledger(&ledger_path(&config.out_dir)).unwrap();
        let planned: Vec<u64> = records.keys().copied().collect();
        let replayed = estimates_from_records(&records, &planned, 1);
        let original = outcome.summary.estimates.conflicts.unwrap().stats;
        let rebuilt = replayed.conflicts.unwrap().stats;
        assert_eq!(original.mean, rebuilt.mean);
        assert_eq!(original.total_estimate, rebuilt.total_estimate);
        // both units come from the same records without re-solving
        assert!(replayed.seconds.is_some());
        assert!(replayed.propagations.is_some());
    }

    #[test]
    fn changed_config_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        run_job(&config).unwrap();
        let mut changed = config.clone();
        changed.seed = 99;
        assert!(matches!(
            run_job(&changed),
            Err(JobError::ConfigChanged { .. })
        ));
    }

    #[test]
    fn ledger_tolerates_partial_final_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.jsonl");
        std::fs::write(
            &path,
            "{\"cell\":0,\"status\":\"unsat\",\"wall_seconds\":0.1}\n{\"cell\":1,\"sta",
        )
        .unwrap();
        let records = load_ledger(&path).unwrap();
        assert_eq!(records.len(), 1);
        assert!(records.contains_key(&0));
        // corruption before the final line is an error
        std::fs::write(&path, "garbage\n{\"cell\":0,\"status\":\"unsat\",\"wall_seconds\":0.1}\n")
            .unwrap();
        assert!(matches!(
            load_ledger(&path),
            Err(JobError::CorruptLedger { line: 1, .. })
        ));
    }
}
