//! Cross-module invariants checked on randomized circuits.

use proptest::prelude::*;
use rand::Rng;

use satpart_core::circuit::random::random_circuit;
use satpart_core::circuit::{normalize_and_not, Circuit, InputWord};
use satpart_core::cnf::Var;
use satpart_core::counting::enumerate_input_models;
use satpart_core::encode::{miter_cnf, template_cnf};
use satpart_core::partition::{
    build_group_partitioning, count_all_cells, GroupFamily,
};
use satpart_core::propagate::unit_propagate;
use satpart_core::randutil::prng;
use satpart_core::solver::{solve_cnf, SolveOutcome};

fn arb_circuit(max_inputs: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
    (2..=max_inputs, 3..=max_gates, any::<u64>())
        .prop_map(|(n, g, seed)| random_circuit(&mut prng(seed), n, g))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Gluing preserves both component functions.
    #[test]
    fn glue_matches_separate_simulation(seed in any::<u64>()) {
        let mut rng = prng(seed);
        let f = random_circuit(&mut rng, 5, 20);
        let h = {
            let mut h = random_circuit(&mut rng, 5, 15);
            while h.num_outputs() != f.num_outputs() {
                h = random_circuit(&mut rng, 5, 15);
            }
            h
        };
        let glued = Circuit::glue(&f, &h).unwrap();
        for w in 0..32u64 {
            let word = InputWord::from_int(w, 5);
            let mut expected = f.eval(&word).unwrap();
            expected.extend(h.eval(&word).unwrap());
            prop_assert_eq!(glued.circuit.eval(&word).unwrap(), expected);
        }
    }

    /// Fixing the ancestor set of one gate propagates the whole cone to its
    /// simulated values without conflict.
    #[test]
    fn cone_assumptions_force_cone_values(seed in any::<u64>(), pick in any::<u64>()) {
        let mut rng = prng(seed);
        let n = 3 + (seed % 8) as usize; // up to 10 inputs
        let circuit = random_circuit(&mut rng, n, 30);
        let enc = template_cnf(&circuit);
        let gates: Vec<_> = circuit.gate_ids().collect();
        let v = gates[(pick % gates.len() as u64) as usize];
        let cone = circuit.cone(v).unwrap();

        let word = InputWord::from_int(pick, n);
        let interp = circuit.interpret(&word).unwrap();
        let input_pos: Vec<usize> = cone
            .ancestors
            .iter()
            .map(|a| circuit.inputs().iter().position(|i| i == a).unwrap())
            .collect();
        let assumptions: Vec<_> = cone
            .ancestors
            .iter()
            .zip(&input_pos)
            .map(|(a, &pos)| enc.vars.var(*a).lit(word.bits()[pos]))
            .collect();
        let result = unit_propagate(&enc.cnf, &assumptions);
        let assignment = result.assignment().expect("cone propagation is conflict-free");
        for node in &cone.nodes {
            let var = enc.vars.var(*node);
            prop_assert_eq!(
                assignment.value(var),
                Some(interp.values[node.index()]),
                "node {} of cone({})", node, v
            );
        }
    }

    /// Layers partition the nodes, inputs first, parents strictly earlier.
    #[test]
    fn layers_partition_the_circuit(c in arb_circuit(6, 40)) {
        let layers = c.layers();
        let mut layer_of = vec![usize::MAX; c.num_nodes()];
        let mut seen = 0;
        for (k, layer) in layers.iter().enumerate() {
            for id in layer {
                prop_assert_eq!(layer_of[id.index()], usize::MAX, "node in two layers");
                layer_of[id.index()] = k;
                seen += 1;
            }
        }
        prop_assert_eq!(seen, c.num_nodes());
        prop_assert_eq!(layers[0].as_slice(), c.inputs());
        for (i, node) in c.nodes().iter().enumerate() {
            for p in &node.parents {
                prop_assert!(layer_of[p.index()] < layer_of[i]);
            }
        }
    }

    /// Lowering to the AND/inverter basis preserves the function.
    #[test]
    fn normalization_preserves_function(c in arb_circuit(6, 30)) {
        let lowered = normalize_and_not(&c);
        prop_assert!(lowered.is_and_inverter());
        let n = c.num_inputs();
        for w in 0..1u64 << n {
            let word = InputWord::from_int(w, n);
            prop_assert_eq!(c.eval(&word).unwrap(), lowered.eval(&word).unwrap());
        }
    }

    /// The miter is unsatisfiable exactly when exhaustive simulation finds
    /// no differing output.
    #[test]
    fn miter_status_matches_exhaustive_equivalence(seed in any::<u64>()) {
        let mut rng = prng(seed);
        let n = 3 + (seed % 5) as usize; // up to 7 inputs
        let f = random_circuit(&mut rng, n, 16);
        let mut h = random_circuit(&mut rng, n, 12);
        while h.num_outputs() != f.num_outputs() {
            h = random_circuit(&mut rng, n, 12);
        }
        let equal = (0..1u64 << n).all(|w| {
            let word = InputWord::from_int(w, n);
            f.eval(&word).unwrap() == h.eval(&word).unwrap()
        });
        let glued = Circuit::glue(&f, &h).unwrap();
        let enc = miter_cnf(&glued.circuit).unwrap();
        let outcome = solve_cnf(&enc.cnf, &[], &[]);
        prop_assert_eq!(
            outcome,
            if equal { SolveOutcome::Unsat } else { SolveOutcome::Sat }
        );
    }

    /// Model counts of all cells of a group partitioning sum to 2^n.
    #[test]
    fn group_partitioning_counts_conserve_models(seed in any::<u64>()) {
        let mut rng = prng(seed);
        let n = 4 + (seed % 4) as usize; // up to 7 inputs
        let f = random_circuit(&mut rng, n, 14);
        let mut h = random_circuit(&mut rng, n, 11);
        while h.num_outputs() != f.num_outputs() {
            h = random_circuit(&mut rng, n, 11);
        }
        let glued = Circuit::glue(&f, &h).unwrap();
        let enc = template_cnf(&glued.circuit);
        for family in [GroupFamily::Xor2, GroupFamily::Maj3] {
            let p = build_group_partitioning(&enc.cnf, enc.vars.input_vars(), family, None)
                .unwrap();
            let counts = count_all_cells(&enc.cnf, enc.vars.input_vars(), &p).unwrap();
            prop_assert_eq!(counts.iter().sum::<u64>(), 1u64 << n);
        }
    }
}

#[test]
fn template_model_count_equals_two_pow_n() {
    let mut rng = prng(404);
    for _ in 0..12 {
        let n = rng.random_range(2..=8usize);
        let c = random_circuit(&mut rng, n, 25);
        let enc = template_cnf(&c);
        let count = enumerate_input_models(&enc.cnf, enc.vars.input_vars()).unwrap();
        assert_eq!(count, 1u64 << n);
    }
}

#[test]
fn fig_style_template_has_expected_input_vars() {
    let c = satpart_core::circuit::example_circuit();
    let enc = template_cnf(&c);
    assert_eq!(enc.vars.input_vars(), &[Var::new(1), Var::new(2), Var::new(3)]);
    assert_eq!(
        enumerate_input_models(&enc.cnf, enc.vars.input_vars()).unwrap(),
        8
    );
}
