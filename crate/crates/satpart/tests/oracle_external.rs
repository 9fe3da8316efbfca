//! External-oracle contract tests against scripted fake solvers, plus the
//! embedded-vs-reference agreement check.

#![cfg(unix)]

use std::io::Write;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use satpart::oracle::{
    EmbeddedOracle, ExternalOracle, Oracle, OracleChoice, OracleError, RunStatus, SolveRequest,
};
use satpart_core::cnf::{clause_from_dimacs, Cnf};
use satpart_core::encode::template_cnf;
use satpart_core::randutil::prng;
use satpart_core::sortgen::{generate, SortAlgorithm, SortSpec};

fn write_script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "#!/bin/sh").unwrap();
    f.write_all(body.as_bytes()).unwrap();
    drop(f);
    let mut perms = std::fs::metadata(&path).unwrap().permissions();
    perms.set_mode(0o755);
    std::fs::set_permissions(&path, perms).unwrap();
    path
}

fn external(path: &Path) -> ExternalOracle {
    ExternalOracle::new(vec![path.to_string_lossy().into_owned()])
}

fn simple_sat_cnf() -> Cnf {
    let mut cnf = Cnf::new(2);
    cnf.add_clause(clause_from_dimacs(&[1, 2])).unwrap();
    cnf.add_clause(clause_from_dimacs(&[-1, 2])).unwrap();
    cnf
}

#[test]
fn canned_sat_answer_with_valid_model() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_script(
        dir.path(),
        "sat.sh",
        "echo 'c conflicts: 12'\necho 's SATISFIABLE'\necho 'v 1 2 0'\nexit 10\n",
    );
    let cnf = simple_sat_cnf();
    let rec = external(&script).solve(&SolveRequest::plain(&cnf)).unwrap();
    match rec.status {
        RunStatus::Sat(model) => assert_eq!(model, vec![true, true]),
        other => panic!("expected Sat, got {other:?}"),
    }
    assert_eq!(rec.conflicts, Some(12));
}

#[test]
fn lying_sat_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_script(
        dir.path(),
        "liar.sh",
        "echo 's SATISFIABLE'\necho 'v -1 -2 0'\nexit 10\n",
    );
    let cnf = simple_sat_cnf();
    let err = external(&script).solve(&SolveRequest::plain(&cnf)).unwrap_err();
    assert!(matches!(err, OracleError::ModelCheck(_)), "{err}");
}

#[test]
fn canned_unsat_answer() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_script(
        dir.path(),
        "unsat.sh",
        "echo 'c decisions : 4'\necho 's UNSATISFIABLE'\nexit 20\n",
    );
    let cnf = simple_sat_cnf();
    let rec = external(&script).solve(&SolveRequest::plain(&cnf)).unwrap();
    assert_eq!(rec.status, RunStatus::Unsat);
    assert_eq!(rec.decisions, Some(4));
}

#[test]
fn exit_code_20_without_status_line_counts_as_unsat() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_script(dir.path(), "quiet.sh", "exit 20\n");
    let cnf = simple_sat_cnf();
    let rec = external(&script).solve(&SolveRequest::plain(&cnf)).unwrap();
    assert_eq!(rec.status, RunStatus::Unsat);
    assert_eq!(rec.conflicts, None);
}

#[test]
fn garbage_output_is_a_backend_error_not_a_timeout() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_script(dir.path(), "garbage.sh", "echo 'segfault lol'\nexit 139\n");
    let cnf = simple_sat_cnf();
    let err = external(&script).solve(&SolveRequest::plain(&cnf)).unwrap_err();
    assert!(matches!(err, OracleError::Backend(_)), "{err}");
}

#[test]
fn slow_solver_times_out_and_is_never_unsat() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_script(dir.path(), "slow.sh", "sleep 30\necho 's UNSATISFIABLE'\n");
    let cnf = simple_sat_cnf();
    let req = SolveRequest {
        cnf: &cnf,
        extra_clauses: &[],
        assumptions: &[],
        timeout: Some(Duration::from_millis(120)),
        task_id: 0,
    };
    let start = Instant::now();
    let rec = external(&script).solve(&req).unwrap();
    assert_eq!(rec.status, RunStatus::TimedOut);
    assert!(start.elapsed() < Duration::from_secs(5));
}

/// A real (if slow) reference: brute force over ≤ 16 variables in Python,
/// speaking the DIMACS/output contract of a normal solver.
fn reference_solver(dir: &Path) -> PathBuf {
    let py = dir.join("ref_solver.py");
    std::fs::write(
        &py,
        r#"
import itertools, sys
clauses, nvars = [], 0
for line in open(sys.argv[1]):
    t = line.split()
    if not t or t[0] in ('c', '%'): continue
    if t[0] == 'p': nvars = int(t[2]); continue
    lits = [int(x) for x in t if x != '0']
    if lits: clauses.append(lits)
for bits in itertools.product([False, True], repeat=nvars):
    if all(any((l > 0) == bits[abs(l) - 1] for l in c) for c in clauses):
        print('s SATISFIABLE')
        print('v ' + ' '.join(str(i + 1 if b else -(i + 1)) for i, b in enumerate(bits)) + ' 0')
        print('c conflicts: 0')
        sys.exit(10)
print('s UNSATISFIABLE')
print('c conflicts: 0')
sys.exit(20)
"#,
    )
    .unwrap();
    write_script(dir, "ref.sh", &format!("exec python3 {} \"$@\"\n", py.display()))
}

#[test]
fn embedded_and_reference_agree_on_random_instances() {
    let dir = tempfile::tempdir().unwrap();
    let reference = external(&reference_solver(dir.path()));
    let mut rng = prng(2024);
    // status agreement across many random small formulas
    for round in 0..500 {
        let num_vars = rng.random_range(2..=7u32);
        let num_clauses = rng.random_range(2..=18usize);
        let mut cnf = Cnf::new(num_vars);
        for _ in 0..num_clauses {
            let len = rng.random_range(1..=3usize);
            let lits: Vec<i32> = (0..len)
                .map(|_| {
                    let v = rng.random_range(1..=num_vars as i32);
                    if rng.random() {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            cnf.add_clause(clause_from_dimacs(&lits)).unwrap();
        }
        let req = SolveRequest::plain(&cnf);
        let ours = EmbeddedOracle.solve(&req).unwrap();
        let theirs = reference.solve(&req).unwrap();
        let same = matches!(
            (&ours.status, &theirs.status),
            (RunStatus::Sat(_), RunStatus::Sat(_)) | (RunStatus::Unsat, RunStatus::Unsat)
        );
        assert!(same, "round {round}: {:?} vs {:?}", ours.status, theirs.status);
    }
}

#[test]
fn template_cnf_is_satisfied_quickly() {
    // a satisfiable non-miter encoding must be easy for the solver
    let f = generate(&SortSpec::new(SortAlgorithm::Bubble, 5, 3).unwrap());
    let h = generate(&SortSpec::new(SortAlgorithm::Selection, 5, 3).unwrap());
    let glued = satpart_core::circuit::Circuit::glue(&f, &h).unwrap();
    let enc = template_cnf(&glued.circuit);
    let start = Instant::now();
    let rec = EmbeddedOracle.solve(&SolveRequest::plain(&enc.cnf)).unwrap();
    assert!(matches!(rec.status, RunStatus::Sat(_)));
    assert!(
        start.elapsed() < Duration::from_secs(1),
        "took {:?}",
        start.elapsed()
    );
}

#[test]
fn oracle_choice_builds_both_backends() {
    assert_eq!(OracleChoice::Embedded.describe(), "embedded");
    let ext = OracleChoice::External(vec!["solver".into(), "-q".into()]);
    assert_eq!(ext.describe(), "solver -q");
}
