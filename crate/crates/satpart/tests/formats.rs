//! Round-trip properties of the file formats.

use proptest::prelude::*;

use satpart::{aiger, dimacs};
use satpart_core::circuit::random::random_circuit;
use satpart_core::circuit::{Circuit, InputWord};
use satpart_core::cnf::{clause_from_dimacs, Cnf};
use satpart_core::encode::miter_cnf;
use satpart_core::randutil::prng;
use satpart_core::sortgen::{generate, SortAlgorithm, SortSpec};

fn arb_cnf() -> impl Strategy<Value = Cnf> {
    (1u32..20, prop::collection::vec(prop::collection::vec((1i32..20, any::<bool>()), 1..6), 0..40))
        .prop_map(|(extra_vars, raw)| {
            let mut max_var = extra_vars;
            for clause in &raw {
                for &(v, _) in clause {
                    max_var = max_var.max(v as u32);
                }
            }
            let mut cnf = Cnf::new(max_var);
            for clause in raw {
                let lits: Vec<i32> = clause
                    .into_iter()
                    .map(|(v, pos)| if pos { v } else { -v })
                    .collect();
                cnf.add_clause(clause_from_dimacs(&lits)).unwrap();
            }
            cnf
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dimacs_round_trip_preserves_clause_multiset(cnf in arb_cnf()) {
        let mut buf = Vec::new();
        dimacs::write_dimacs(&cnf, &mut buf).unwrap();
        let back = dimacs::read_dimacs(buf.as_slice()).unwrap();
        prop_assert_eq!(back, cnf);
    }

    #[test]
    fn aiger_round_trip_is_structural_identity(seed in any::<u64>()) {
        let mut rng = prng(seed);
        let c = random_circuit(&mut rng, 4, 25);
        let mut buf = Vec::new();
        aiger::write_circuit(&c, &mut buf).unwrap();
        let back = aiger::read_circuit(buf.as_slice()).unwrap();
        prop_assert_eq!(back, c);
    }
}

#[test]
fn miter_cnf_survives_dimacs_round_trip() {
    let f = generate(&SortSpec::new(SortAlgorithm::Bubble, 3, 2).unwrap());
    let h = generate(&SortSpec::new(SortAlgorithm::Pancake, 3, 2).unwrap());
    let glued = Circuit::glue(&f, &h).unwrap();
    let enc = miter_cnf(&glued.circuit).unwrap();
    let mut buf = Vec::new();
    dimacs::write_dimacs(&enc.cnf, &mut buf).unwrap();
    let back = dimacs::read_dimacs(buf.as_slice()).unwrap();
    assert_eq!(back, enc.cnf);
}

#[test]
fn sorting_circuits_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for alg in SortAlgorithm::ALL {
        let c = generate(&SortSpec::new(alg, 3, 2).unwrap());
        let path = dir.path().join(format!("{}.aag", alg.name()));
        aiger::write_circuit_file(&c, &path).unwrap();
        let back = aiger::read_circuit_file(&path).unwrap();
        assert_eq!(back, c);
        // and the parsed circuit still sorts
        let word = InputWord(satpart_core::sortgen::pack_numbers(&[3, 0, 2], 2));
        let out = back.eval(&word).unwrap();
        assert_eq!(satpart_core::sortgen::unpack_numbers(&out, 2), vec![0, 2, 3]);
    }
}
