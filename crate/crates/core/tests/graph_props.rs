mod common;

use std::collections::BTreeSet;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stationcover::gen::{generate, GeneratorParams};
use stationcover::graphview::{
    build_n1, build_n2, check_proposition1, encode_3sat, proposition1_violations, to_graph, two_core,
    verify_structure_witnesses, Formula3Sat,
};
use stationcover::reduce_to_core;
use stationcover::solve::solve_naive;

#[test]
fn constructions_reproduce_the_graph_and_cores() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let n = rng.gen_range(10..=100);
        let extra = rng.gen_range(1..=n / 3);
        let g = random_connected_graph(&mut rng, n, extra);

        let n1 = build_n1(&g, None).unwrap();
        assert_eq!(to_graph(&n1).named_edges(), g.named_edges());
        let r1 = reduce_to_core(&n1);
        for comp in r1.core.connected_components() {
            assert_eq!(comp.station_count(), 1);
        }
        assert_eq!(r1.complexity, 1);

        let n2 = build_n2(&g).unwrap();
        assert_eq!(to_graph(&n2).named_edges(), g.named_edges());
        let r2 = reduce_to_core(&n2);
        let core_names: BTreeSet<String> = r2.core.stations().iter().cloned().collect();
        assert_eq!(core_names, two_core_names(&g));
        assert_eq!(r2.core.connection_count(), two_core(&g).edge_count());
    }
}

#[test]
fn core_graph_stays_in_two_core_on_generated_and_constructed_instances() {
    for (beta, t, seed) in [(2.5, 0.2, 1), (3.5, 0.6, 2), (f64::INFINITY, 0.9, 3), (5.0, 0.0, 4)] {
        let mut p = GeneratorParams::main(beta, t, seed);
        p.n_stations = 400;
        let g = generate(&p).unwrap();
        assert!(proposition1_violations(&g.full).is_empty(), "beta={beta} T={t}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let n = rng.gen_range(10..=40);
        let g = random_connected_graph(&mut rng, n, 4);
        assert!(check_proposition1(&build_n1(&g, None).unwrap()));
        assert!(check_proposition1(&build_n2(&g).unwrap()));
    }
    for _ in 0..100 {
        assert!(check_proposition1(&mixed_instance(&mut rng, 15)));
    }
}

fn all_clauses(n: i32) -> Vec<[i32; 3]> {
    let lits: Vec<i32> = (1..=n).flat_map(|v| [v, -v]).collect();
    let mut out = Vec::new();
    for (i, &a) in lits.iter().enumerate() {
        for (j, &b) in lits.iter().enumerate().skip(i) {
            for &c in lits.iter().skip(j) {
                out.push([a, b, c]);
            }
        }
    }
    out
}

fn check_encoding(f: &Formula3Sat) {
    let sat = truth_table_sat(f.num_vars, &f.clauses);
    let (inst, graph) = encode_3sat(f).unwrap();
    let opt = solve_naive(&inst).unwrap().len();
    assert!(opt >= f.num_vars, "{f:?}");
    assert_eq!(sat, opt == f.num_vars, "{f:?}");
    assert!(verify_structure_witnesses(&graph));
}

#[test]
fn exhaustive_small_formulas() {
    for n in 1..=4 {
        let cls = all_clauses(n);
        for (i, a) in cls.iter().enumerate() {
            check_encoding(&Formula3Sat::new(n as usize, vec![*a]));
            for b in &cls[i..] {
                check_encoding(&Formula3Sat::new(n as usize, vec![*a, *b]));
            }
        }
    }
    // Every subset of the eight sign patterns on (x1, x2, x3), including
    // the unsatisfiable full set.
    let patterns: Vec<[i32; 3]> = (0..8)
        .map(|b| [1, 2, 3].map(|v: i32| if b >> (v - 1) & 1 == 1 { -v } else { v }))
        .collect();
    for subset in 1u32..256 {
        let clauses: Vec<[i32; 3]> = (0..8).filter(|k| subset >> k & 1 == 1).map(|k| patterns[k]).collect();
        check_encoding(&Formula3Sat::new(3, clauses));
    }
}

fn random_formula<R: Rng>(rng: &mut R, n: usize, m: usize) -> Formula3Sat {
    let clauses = (0..m)
        .map(|_| {
            let mut cl = [0i32; 3];
            for l in &mut cl {
                let v = rng.gen_range(1..=n as i32);
                *l = if rng.gen() { v } else { -v };
            }
            cl
        })
        .collect();
    Formula3Sat::new(n, clauses)
}

#[test]
fn random_formulas_up_to_eight_variables() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.gen_range(1..=8);
        let m = rng.gen_range(1..=(5 * n).min(24));
        check_encoding(&random_formula(&mut rng, n, m));
    }
}
