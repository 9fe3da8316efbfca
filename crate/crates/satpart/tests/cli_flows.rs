//! End-to-end flows through the `satpart` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use satpart::schema::{read_json, SummaryFile};
use satpart_core::circuit::{Circuit, GateOp, InputWord, NodeId};

fn satpart_bin() -> &'static str {
    env!("CARGO_BIN_EXE_satpart")
}

fn run(args: &[&str]) -> Output {
    Command::new(satpart_bin())
        .args(args)
        .output()
        .expect("spawn satpart")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "satpart {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

struct Workdir {
    #[allow(dead_code)]
    dir: tempfile::TempDir,
    root: PathBuf,
}

impl Workdir {
    fn new() -> Workdir {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        Workdir { dir, root }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

#[test]
fn usage_errors_exit_with_code_one() {
    let out = run(&["gen", "--alg", "bogus", "--k", "3", "--l", "2", "-o", "/tmp/x.aag"]);
    assert_eq!(out.status.code(), Some(2)); // infrastructure: bad algorithm name surfaces from parsing
    let out = run(&["definitely-not-a-subcommand"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["gen", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_encode_count_models_flow() {
    let w = Workdir::new();
    let circuit = w.path("bubble42.aag");
    run_ok(&["gen", "--alg", "bubble", "--k", "4", "--l", "2", "-o", &p(&circuit)]);
    let cnf = w.path("bubble42.cnf");
    run_ok(&["encode", "--circuit", &p(&circuit), "-o", &p(&cnf)]);
    let varmap = w.path("bubble42.vars.json");
    assert!(varmap.exists());
    // template CNF over n = 8 inputs has exactly 256 models
    let out = run_ok(&["count-models", "--cnf", &p(&cnf), "--varmap", &p(&varmap)]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["count"], 256);
}

#[test]
fn miter_solve_validate_flow() {
    let w = Workdir::new();
    let left = w.path("bubble.aag");
    let right = w.path("pancake.aag");
    run_ok(&["gen", "--alg", "bubble", "--k", "3", "--l", "2", "-o", &p(&left)]);
    run_ok(&["gen", "--alg", "pancake", "--k", "3", "--l", "2", "-o", &p(&right)]);
    let cnf = w.path("miter.cnf");
    let template = w.path("template.cnf");
    run_ok(&[
        "miter",
        "--left",
        &p(&left),
        "--right",
        &p(&right),
        "-o",
        &p(&cnf),
        "--template-output",
        &p(&template),
    ]);
    let varmap = w.path("miter.vars.json");

    // equivalent circuits: solve-all of the whole instance is UNSAT
    let job = w.path("job-whole");
    let out = run_ok(&[
        "solve-all",
        "--cnf",
        &p(&cnf),
        "-o",
        &p(&job),
        "--expect-unsat",
    ]);
    let summary: SummaryFile = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary.unsat_cells, 1);
    assert!(summary.estimates.conflicts.is_some());

    // 3-maj partitioning validates on this 6-input instance
    let scheme = w.path("maj.scheme.json");
    run_ok(&[
        "partition",
        "--varmap",
        &p(&varmap),
        "--scheme",
        "3-maj",
        "-o",
        &p(&scheme),
    ]);
    let out = run_ok(&[
        "validate",
        "--cnf",
        &p(&template),
        "--varmap",
        &p(&varmap),
        "--scheme",
        &p(&scheme),
    ]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["ok"], true);

    // dropping a cell is detected, exit code 2
    let out = run(&[
        "validate",
        "--cnf",
        &p(&template),
        "--varmap",
        &p(&varmap),
        "--scheme",
        &p(&scheme),
        "--drop-cell",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["ok"], false);

    // conservation: exact per-cell counts sum to 2^6
    let out = run_ok(&[
        "count-models",
        "--cnf",
        &p(&template),
        "--varmap",
        &p(&varmap),
        "--scheme",
        &p(&scheme),
        "--all-cells",
    ]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["total"], 64);
}

#[test]
fn inequivalent_circuits_exit_with_code_ten() {
    let w = Workdir::new();
    let left = w.path("bubble.aag");
    run_ok(&["gen", "--alg", "bubble", "--k", "3", "--l", "2", "-o", &p(&left)]);

    // flip one gate so the functions differ
    let circuit = satpart::aiger::read_circuit_file(&left).unwrap();
    let broken = flip_until_different(&circuit);
    let right = w.path("broken.aag");
    satpart::aiger::write_circuit_file(&broken, &right).unwrap();

    let cnf = w.path("miter.cnf");
    run_ok(&["miter", "--left", &p(&left), "--right", &p(&right), "-o", &p(&cnf)]);
    let job = w.path("job");
    let out = run(&[
        "solve-all",
        "--cnf",
        &p(&cnf),
        "-o",
        &p(&job),
        "--expect-unsat",
    ]);
    assert_eq!(out.status.code(), Some(10));
}

fn flip_until_different(circuit: &Circuit) -> Circuit {
    let n = circuit.num_inputs();
    for id in 0..circuit.num_nodes() {
        let node = NodeId(id as u32);
        let Some(op) = circuit.node(node).gate_op() else {
            continue;
        };
        let replacement = match op {
            GateOp::And => GateOp::Or,
            GateOp::Or => GateOp::And,
            GateOp::Xor => GateOp::Xnor,
            GateOp::Mux => GateOp::Maj3,
            _ => continue,
        };
        let candidate = circuit.replace_gate_op(node, replacement).unwrap();
        let differs = (0..1u64 << n).any(|w| {
            let word = InputWord::from_int(w, n);
            candidate.eval(&word).unwrap() != circuit.eval(&word).unwrap()
        });
        if differs {
            return candidate;
        }
    }
    panic!("no functional flip found");
}

#[test]
fn estimate_is_seed_reproducible_and_sample_means_emits_csv() {
    let w = Workdir::new();
    let left = w.path("bubble.aag");
    let right = w.path("selection.aag");
    run_ok(&["gen", "--alg", "bubble", "--k", "4", "--l", "2", "-o", &p(&left)]);
    run_ok(&["gen", "--alg", "selection", "--k", "4", "--l", "2", "-o", &p(&right)]);
    let cnf = w.path("miter.cnf");
    run_ok(&["miter", "--left", &p(&left), "--right", &p(&right), "-o", &p(&cnf)]);
    let varmap = w.path("miter.vars.json");
    let scheme = w.path("xor.scheme.json");
    run_ok(&[
        "partition",
        "--varmap",
        &p(&varmap),
        "--scheme",
        "2-xor",
        "-o",
        &p(&scheme),
    ]);

    // sampled estimate, twice with the same seed in fresh directories
    let mut totals = Vec::new();
    for name in ["est-a", "est-b"] {
        let job = w.path(name);
        let out = run_ok(&[
            "estimate",
            "--cnf",
            &p(&cnf),
            "--scheme",
            &p(&scheme),
            "-N",
            "6",
            "--seed",
            "42",
            "-o",
            &p(&job),
        ]);
        let summary: SummaryFile = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(summary.planned, 6);
        assert_eq!(summary.population, 16);
        totals.push(summary.estimates.conflicts.unwrap().stats.total_estimate);
    }
    assert_eq!(totals[0], totals[1]);

    // full run feeds the sample-means experiment
    let job = w.path("full");
    run_ok(&[
        "solve-all",
        "--cnf",
        &p(&cnf),
        "--scheme",
        &p(&scheme),
        "--parallel",
        "2",
        "-o",
        &p(&job),
        "--expect-unsat",
    ]);
    let csv = w.path("means.csv");
    run_ok(&[
        "sample-means",
        "--job-dir",
        &p(&job),
        "--grid",
        "2,4,8,16",
        "--p",
        "200",
        "--seed",
        "7",
        "-o",
        &p(&csv),
    ]);
    // the job dir carries the standard artifacts
    for artifact in ["ledger.jsonl", "summary.json", "cells.csv", "job.json"] {
        assert!(job.join(artifact).exists(), "{artifact} missing");
    }
    let cells = std::fs::read_to_string(job.join("cells.csv")).unwrap();
    assert!(cells.starts_with("cell,status,wall_seconds,conflicts"));
    assert_eq!(cells.lines().count(), 17); // header + 16 cells

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,mean_of_means,min,q1,median,q3,max"
    );
    assert_eq!(lines.count(), 4);
    // N = s row is exactly 1.0 everywhere
    let last = text.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    assert_eq!(fields[0], "16");
    for v in &fields[1..] {
        assert_eq!(v.parse::<f64>().unwrap(), 1.0);
    }

    // resumable: re-running the finished job solves nothing new
    let out = run_ok(&[
        "solve-all",
        "--cnf",
        &p(&cnf),
        "--scheme",
        &p(&scheme),
        "--parallel",
        "2",
        "-o",
        &p(&job),
        "--expect-unsat",
    ]);
    let summary: SummaryFile = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary.solved_now, 0);
    assert_eq!(summary.resumed, 16);

    let _ = read_json::<SummaryFile>(&satpart::jobs::summary_path(&job)).unwrap();
}

#[test]
fn balance_and_cube_partition_flow() {
    let w = Workdir::new();
    let left = w.path("bubble.aag");
    let right = w.path("selection.aag");
    run_ok(&["gen", "--alg", "bubble", "--k", "3", "--l", "2", "-o", &p(&left)]);
    run_ok(&["gen", "--alg", "selection", "--k", "3", "--l", "2", "-o", &p(&right)]);
    let cnf = w.path("miter.cnf");
    let template = w.path("template.cnf");
    run_ok(&[
        "miter",
        "--left",
        &p(&left),
        "--right",
        &p(&right),
        "-o",
        &p(&cnf),
        "--template-output",
        &p(&template),
    ]);
    let varmap = w.path("miter.vars.json");

    let bal_left = w.path("left.balance.json");
    let bal_right = w.path("right.balance.json");
    for (circuit, out) in [(&left, &bal_left), (&right, &bal_right)] {
        run_ok(&[
            "balance",
            "--circuit",
            &p(circuit),
            "--eps",
            "0.05",
            "--delta",
            "0.01",
            "--seed",
            "3",
            "-o",
            &p(out),
        ]);
    }
    let scheme = w.path("cubes.scheme.json");
    run_ok(&[
        "partition",
        "--varmap",
        &p(&varmap),
        "--scheme",
        "cubes",
        "--left-balance",
        &p(&bal_left),
        "--right-balance",
        &p(&bal_right),
        "--q",
        "2",
        "--mode",
        "balanced",
        "-o",
        &p(&scheme),
    ]);

    // 2+2 cubes: 16 cells, still a valid partitioning
    let out = run_ok(&[
        "validate",
        "--cnf",
        &p(&template),
        "--varmap",
        &p(&varmap),
        "--scheme",
        &p(&scheme),
    ]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["ok"], true);
    assert_eq!(value["cells_checked"], 16);
}
