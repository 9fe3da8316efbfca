//! The `satpart` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 infrastructure or check failure,
//! 10 equivalence refuted (a SAT cell where UNSAT was expected).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use satpart_core::balance::{
    estimate_balance, select_decomposition_set, SelectionMode,
};
use satpart_core::circuit::{normalize_and_not, Circuit};
use satpart_core::cnf::Var;
use satpart_core::counting::{count_cell_models, CountMode, ModelCount};
use satpart_core::encode::{miter_cnf, template_cnf};
use satpart_core::estimator::{sample_means_experiment, MetricUnit};
use satpart_core::partition::{
    build_cube_partitioning, build_group_partitioning, count_all_cells, validate_cells,
    GroupFamily, Partitioning,
};
use satpart_core::sortgen::{self, SortAlgorithm, SortSpec};

use crate::aiger;
use crate::dimacs;
use crate::jobs::{self, JobConfig, SampleSize};
use crate::oracle::OracleChoice;
use crate::report;
use crate::schema::{
    read_json, write_json, BalanceFile, SchemeFile, VarMapFile,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFRA: i32 = 2;
pub const EXIT_EQUIVALENCE_REFUTED: i32 = 10;

#[derive(Parser)]
#[command(
    name = "satpart",
    version,
    about = "Generate sorting-circuit equivalence benchmarks, encode them to CNF, \
             build SAT partitionings, and estimate instance hardness"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a sorting circuit (aag output)
    Gen(GenArgs),
    /// Tseytin-encode a circuit into DIMACS CNF plus a varmap sidecar
    Encode(EncodeArgs),
    /// Build the equivalence-checking miter CNF of two circuits
    Miter(MiterArgs),
    /// Estimate per-gate output probabilities by random simulation
    Balance(BalanceArgs),
    /// Build a partitioning scheme over an encoded instance
    Partition(PartitionArgs),
    /// Solve every cell of a partitioning (resumable)
    SolveAll(SolveArgs),
    /// Solve a random sample of cells and estimate the instance hardness
    Estimate(EstimateArgs),
    /// Resample a completed ledger: distribution of sample means vs sample size
    SampleMeans(SampleMeansArgs),
    /// Count models of a template-style CNF, optionally per partition cell
    CountModels(CountModelsArgs),
    /// Check the partitioning axioms exhaustively on a small instance
    Validate(ValidateArgs),
}

fn parse_algorithm(s: &str) -> Result<SortAlgorithm, String> {
    s.parse().map_err(|e: sortgen::SortGenError| e.to_string())
}

#[derive(Args)]
struct GenArgs {
    /// bubble, selection or pancake
    #[arg(long, value_parser = parse_algorithm)]
    alg: SortAlgorithm,
    /// How many numbers to sort
    #[arg(long)]
    k: usize,
    /// Bits per number
    #[arg(long)]
    l: usize,
    #[arg(short, long)]
    output: PathBuf,
    /// Lower to the AND/inverter basis before writing
    #[arg(long)]
    normalize_aig: bool,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Varmap sidecar path (default: <output>.vars.json)
    #[arg(long)]
    varmap: Option<PathBuf>,
}

#[derive(Args)]
struct MiterArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    varmap: Option<PathBuf>,
    /// Also write the miter-free template CNF of the glued pair (same
    /// variable numbering); that is the file model counting and validation
    /// run against
    #[arg(long)]
    template_output: Option<PathBuf>,
}

#[derive(Args)]
struct BalanceArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct PartitionArgs {
    /// Varmap sidecar of the encoded instance
    #[arg(long)]
    varmap: PathBuf,
    /// 2-xor, 3-maj, 4-bent, or cubes
    #[arg(long)]
    scheme: String,
    /// Shuffle the input variables before grouping
    #[arg(long)]
    shuffle: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Balance report of the left circuit (cubes)
    #[arg(long)]
    left_balance: Option<PathBuf>,
    /// Balance report of the right circuit (cubes)
    #[arg(long)]
    right_balance: Option<PathBuf>,
    /// Gates per circuit in the decomposition set (cubes)
    #[arg(long)]
    q: Option<usize>,
    /// balanced or unbalanced gate selection (cubes)
    #[arg(long, default_value = "balanced")]
    mode: String,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Clone)]
struct SolveCommon {
    #[arg(long)]
    cnf: PathBuf,
    /// Scheme file; omit to solve the instance as a single cell
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// External solver command (e.g. "kissat -q"); default is the embedded solver
    #[arg(long)]
    solver_cmd: Option<String>,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Per-cell timeout in seconds (censors the estimate)
    #[arg(long)]
    timeout: Option<f64>,
    /// Exit with code 10 if any cell is satisfiable
    #[arg(long)]
    expect_unsat: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Job directory for the ledger, job identity and summary
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: SolveCommon,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: SolveCommon,
    /// Sample size N (cells drawn uniformly without replacement)
    #[arg(short = 'N', long = "sample-size")]
    n: u64,
}

#[derive(Args)]
struct SampleMeansArgs {
    /// Job directory of a completed solve-all run
    #[arg(long)]
    job_dir: PathBuf,
    /// Comma-separated sample sizes; default 8,16,32,64,128,s/2 clipped to s
    #[arg(long)]
    grid: Option<String>,
    /// Resamples per grid point
    #[arg(long, default_value_t = 1000)]
    p: u64,
    #[arg(long, default_value = "conflicts")]
    unit: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CountModelsArgs {
    #[arg(long)]
    cnf: PathBuf,
    #[arg(long)]
    varmap: PathBuf,
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Count one cell of the scheme
    #[arg(long)]
    cell: Option<u64>,
    /// Count every cell of the scheme
    #[arg(long)]
    all_cells: bool,
    /// Estimate by sampling instead of exact enumeration
    #[arg(long)]
    estimate: bool,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    cnf: PathBuf,
    #[arg(long)]
    varmap: PathBuf,
    #[arg(long)]
    scheme: PathBuf,
    /// Drop one cell first (to demonstrate coverage-failure detection)
    #[arg(long)]
    drop_cell: Option<u64>,
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INFRA
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Encode(args) => cmd_encode(args),
        Cmd::Miter(args) => cmd_miter(args),
        Cmd::Balance(args) => cmd_balance(args),
        Cmd::Partition(args) => cmd_partition(args),
        Cmd::SolveAll(args) => cmd_solve(args.common, SampleSize::All),
        Cmd::Estimate(args) => cmd_solve(args.common, SampleSize::N(args.n)),
        Cmd::SampleMeans(args) => cmd_sample_means(args),
        Cmd::CountModels(args) => cmd_count_models(args),
        Cmd::Validate(args) => cmd_validate(args),
    }
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    aiger::read_circuit_file(path).with_context(|| format!("reading circuit {}", path.display()))
}

fn varmap_default(output: &Path, explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| output.with_extension("vars.json"))
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let algorithm: SortAlgorithm = args.alg.parse()?;
    let spec = SortSpec::new(algorithm, args.k, args.l)?;
    let mut circuit = sortgen::generate(&spec);
    if args.normalize_aig {
        circuit = normalize_and_not(&circuit);
    }
    aiger::write_circuit_file(&circuit, &args.output)?;
    eprintln!(
        "{}({},{}): {} inputs, {} gates -> {}",
        algorithm.name(),
        args.k,
        args.l,
        circuit.num_inputs(),
        circuit.gate_count(),
        args.output.display()
    );
    Ok(EXIT_OK)
}

fn cmd_encode(args: EncodeArgs) -> Result<i32> {
    let circuit = read_circuit(&args.circuit)?;
    let enc = template_cnf(&circuit);
    dimacs::write_dimacs_file(&enc.cnf, &args.output)?;
    let varmap_path = varmap_default(&args.output, args.varmap);
    write_json(&VarMapFile::from_template(&enc), &varmap_path)?;
    eprintln!(
        "template: {} vars, {} clauses -> {} (+ {})",
        enc.cnf.num_vars(),
        enc.cnf.num_clauses(),
        args.output.display(),
        varmap_path.display()
    );
    Ok(EXIT_OK)
}

fn cmd_miter(args: MiterArgs) -> Result<i32> {
    let left = read_circuit(&args.left)?;
    let right = read_circuit(&args.right)?;
    let glued = Circuit::glue(&left, &right)?;
    let enc = miter_cnf(&glued.circuit)?;
    dimacs::write_dimacs_file(&enc.cnf, &args.output)?;
    if let Some(template_path) = &args.template_output {
        let template = template_cnf(&glued.circuit);
        dimacs::write_dimacs_file(&template.cnf, template_path)?;
    }
    let varmap_path = varmap_default(&args.output, args.varmap);
    write_json(&VarMapFile::from_miter(&enc, &glued), &varmap_path)?;
    eprintln!(
        "miter: {} vars, {} clauses -> {} (+ {})",
        enc.cnf.num_vars(),
        enc.cnf.num_clauses(),
        args.output.display(),
        varmap_path.display()
    );
    Ok(EXIT_OK)
}

fn cmd_balance(args: BalanceArgs) -> Result<i32> {
    let circuit = read_circuit(&args.circuit)?;
    let report = estimate_balance(&circuit, args.eps, args.delta, args.seed)?;
    write_json(&BalanceFile::from_report(&report), &args.output)?;
    eprintln!(
        "balance: {} gates x {} samples -> {}",
        report.entries.len(),
        report.samples,
        args.output.display()
    );
    Ok(EXIT_OK)
}

fn cmd_partition(args: PartitionArgs) -> Result<i32> {
    let varmap: VarMapFile = read_json(&args.varmap)?;
    let input_vars = varmap.input_vars();
    let base = satpart_core::cnf::Cnf::new(varmap.num_vars);
    let partitioning = match args.scheme.as_str() {
        "cubes" => {
            let left_path = args
                .left_balance
                .ok_or_else(|| anyhow!("--scheme cubes needs --left-balance"))?;
            let right_path = args
                .right_balance
                .ok_or_else(|| anyhow!("--scheme cubes needs --right-balance"))?;
            let q = args.q.ok_or_else(|| anyhow!("--scheme cubes needs --q"))?;
            let mode = match args.mode.as_str() {
                "balanced" => SelectionMode::Balanced,
                "unbalanced" => SelectionMode::Unbalanced,
                other => bail!("unknown selection mode '{other}'"),
            };
            let left: BalanceFile = read_json(&left_path)?;
            let right: BalanceFile = read_json(&right_path)?;
            let picked =
                select_decomposition_set(&left.to_report(), &right.to_report(), q, mode)?;
            let mut vars: Vec<Var> = Vec::with_capacity(2 * q);
            for node in picked.left {
                vars.push(varmap.left_var(node).ok_or_else(|| {
                    anyhow!("varmap has no left-circuit node map; encode with `miter`")
                })?);
            }
            for node in picked.right {
                vars.push(varmap.right_var(node).ok_or_else(|| {
                    anyhow!("varmap has no right-circuit node map; encode with `miter`")
                })?);
            }
            build_cube_partitioning(&vars, &input_vars)?
        }
        name => {
            let family = GroupFamily::from_name(name)
                .ok_or_else(|| anyhow!("unknown scheme '{name}' (2-xor, 3-maj, 4-bent, cubes)"))?;
            let shuffle_seed = args.shuffle.then_some(args.seed);
            build_group_partitioning(&base, &input_vars, family, shuffle_seed)?
        }
    };
    let mut file = SchemeFile::new(partitioning);
    file.shuffle_seed = args.shuffle.then_some(args.seed);
    file.description = Some(format!("{} over {}", args.scheme, args.varmap.display()));
    eprintln!("scheme {}: {} cells -> {}", args.scheme, file.size, args.output.display());
    write_json(&file, &args.output)?;
    Ok(EXIT_OK)
}

fn oracle_choice(solver_cmd: &Option<String>) -> Result<OracleChoice> {
    match solver_cmd {
        None => Ok(OracleChoice::Embedded),
        Some(cmd) => {
            let parts: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            if parts.is_empty() {
                bail!("--solver-cmd is empty");
            }
            Ok(OracleChoice::External(parts))
        }
    }
}

fn cmd_solve(common: SolveCommon, sample: SampleSize) -> Result<i32> {
    let config = JobConfig {
        cnf_path: common.cnf,
        scheme_path: common.scheme,
        oracle: oracle_choice(&common.solver_cmd)?,
        parallelism: common.parallel,
        sample,
        seed: common.seed,
        timeout: common.timeout.map(Duration::from_secs_f64),
        expect_unsat: common.expect_unsat,
        out_dir: common.output.clone(),
    };
    let outcome = jobs::run_job(&config)?;
    println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
    for (cell, msg) in &outcome.failures {
        eprintln!("cell {cell}: oracle failure: {msg}");
    }
    if common.expect_unsat && !outcome.summary.sat_cells.is_empty() {
        eprintln!(
            "equivalence refuted: satisfiable cells {:?}",
            outcome.summary.sat_cells
        );
        return Ok(EXIT_EQUIVALENCE_REFUTED);
    }
    if !outcome.completed {
        return Ok(EXIT_INFRA);
    }
    Ok(EXIT_OK)
}

fn parse_unit(name: &str) -> Result<MetricUnit> {
    MetricUnit::from_name(name)
        .ok_or_else(|| anyhow!("unknown unit '{name}' (seconds, conflicts, propagations)"))
}

fn cmd_sample_means(args: SampleMeansArgs) -> Result<i32> {
    let unit = parse_unit(&args.unit)?;
    let records = jobs::load_ledger(&jobs::ledger_path(&args.job_dir))?;
    if records.is_empty() {
        bail!("no ledger records in {}", args.job_dir.display());
    }
    let population = jobs::population_values(&records, unit)?;
    let s = population.len() as u64;
    let grid: Vec<u64> = match &args.grid {
        Some(text) => text
            .split(',')
            .map(|t| t.trim().parse::<u64>().context("bad grid entry"))
            .collect::<Result<_>>()?,
        None => {
            let mut grid: Vec<u64> = [8, 16, 32, 64, 128, s / 2]
                .into_iter()
                .filter(|&n| n >= 1 && n <= s)
                .collect();
            grid.sort_unstable();
            grid.dedup();
            grid
        }
    };
    let report = sample_means_experiment(&population, &grid, args.p, args.seed)?;
    match &args.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            report::write_sample_means_csv(&report, &mut w)?;
            w.flush()?;
            eprintln!(
                "sample means over s={s} cells, P={} -> {}",
                args.p,
                path.display()
            );
        }
        None => {
            let mut out = std::io::stdout().lock();
            report::write_sample_means_csv(&report, &mut out)?;
        }
    }
    Ok(EXIT_OK)
}

fn load_partitioning(path: &Path) -> Result<Partitioning> {
    let file: SchemeFile = read_json(path)?;
    Ok(file.partitioning)
}

fn cmd_count_models(args: CountModelsArgs) -> Result<i32> {
    let cnf = dimacs::read_dimacs_file(&args.cnf)?;
    let varmap: VarMapFile = read_json(&args.varmap)?;
    let input_vars = varmap.input_vars();
    let mode = if args.estimate {
        CountMode::Estimate {
            epsilon: args.eps,
            delta: args.delta,
            seed: args.seed,
        }
    } else {
        CountMode::Exact
    };
    let value = if args.all_cells {
        let scheme = args
            .scheme
            .as_deref()
            .ok_or_else(|| anyhow!("--all-cells needs --scheme"))?;
        let partitioning = load_partitioning(scheme)?;
        if args.estimate {
            bail!("--all-cells only supports exact counting");
        }
        let counts = count_all_cells(&cnf, &input_vars, &partitioning)?;
        let total: u64 = counts.iter().sum();
        serde_json::json!({ "counts": counts, "total": total })
    } else {
        let cell = match (&args.scheme, args.cell) {
            (Some(scheme), Some(index)) => {
                let partitioning = load_partitioning(scheme)?;
                if index >= partitioning.size() {
                    bail!("cell {index} out of range (size {})", partitioning.size());
                }
                partitioning.cell(index)
            }
            (None, None) => Vec::new(),
            _ => bail!("--scheme and --cell go together"),
        };
        match count_cell_models(&cnf, &input_vars, &cell, mode)? {
            ModelCount::Exact(count) => serde_json::json!({ "count": count }),
            ModelCount::Estimated {
                value,
                fraction,
                epsilon,
                delta,
                samples,
            } => serde_json::json!({
                "estimate": value,
                "fraction": fraction,
                "epsilon": epsilon,
                "delta": delta,
                "samples": samples,
            }),
        }
    };
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(EXIT_OK)
}

fn cmd_validate(args: ValidateArgs) -> Result<i32> {
    let cnf = dimacs::read_dimacs_file(&args.cnf)?;
    let varmap: VarMapFile = read_json(&args.varmap)?;
    let partitioning = load_partitioning(&args.scheme)?;
    let mut cells = partitioning.cells();
    if let Some(drop) = args.drop_cell {
        if drop >= cells.len() as u64 {
            bail!("cell {drop} out of range");
        }
        cells.remove(drop as usize);
    }
    let report = validate_cells(&cnf, &varmap.input_vars(), &cells)?;
    let value = serde_json::json!({
        "ok": report.ok,
        "words_checked": report.words_checked,
        "cells_checked": report.cells_checked,
        "violations": report
            .violations
            .iter()
            .map(|v| serde_json::json!({ "word": v.word, "matching_cells": v.matching_cells }))
            .collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(if report.ok { EXIT_OK } else { EXIT_INFRA })
}
