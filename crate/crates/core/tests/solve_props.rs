mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stationcover::solve::{covers, solve_exact, solve_naive, solve_pipeline, verify_cover, Budget, SolveError};
use stationcover::Instance;

fn names(inst: &Instance, cover: &[u32]) -> Vec<String> {
    cover.iter().map(|&s| inst.station_name(s).to_string()).collect()
}

#[test]
fn three_solvers_agree_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..500 {
        let inst = mixed_instance(&mut rng, 18);
        let naive = solve_naive(&inst).unwrap();
        let exact = solve_exact(&inst, Budget::unlimited()).unwrap();
        let (piped, _) = solve_pipeline(&inst, Budget::unlimited()).unwrap();
        assert_eq!(naive.len(), exact.len());
        assert_eq!(naive.len(), piped.len());
        for cover in [&naive, &exact, &piped] {
            assert!(verify_cover(&inst, &names(&inst, cover)).unwrap());
        }
    }
}

#[test]
fn naive_matches_bitmask_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let inst = mixed_instance(&mut rng, 14);
        assert_eq!(solve_naive(&inst).unwrap().len(), brute_force_optimum(&inst));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn adding_a_connection_never_lowers_the_optimum(
        inst in arb_instance(12, 10),
        extra in prop::collection::vec(0usize..12, 1..5),
    ) {
        let n = inst.station_count();
        let mut lists: Vec<Vec<usize>> = inst
            .connections()
            .iter()
            .map(|c| c.iter().map(|&s| s as usize).collect())
            .collect();
        let before = solve_naive(&inst).unwrap().len();
        lists.push(extra.iter().map(|&i| i % n).collect());
        let bigger = instance_from_lists(n, &lists);
        prop_assert!(solve_naive(&bigger).unwrap().len() >= before);
    }
}

#[test]
fn budget_exhaustion_still_returns_a_cover() {
    // A long odd cycle of pairs: irreducible and one component. The packing
    // bound proves it in three nodes, so two must run out.
    let n = 41;
    let lists: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
    let inst = instance_from_lists(n, &lists);
    match solve_exact(&inst, Budget::nodes(2)) {
        Err(SolveError::BudgetExhausted { best }) => {
            assert!(covers(&inst, &best));
            assert!(best.len() >= 21);
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
    assert_eq!(solve_exact(&inst, Budget::unlimited()).unwrap().len(), 21);
}

#[test]
fn oversized_naive_input_is_rejected() {
    let lists: Vec<Vec<usize>> = (0..30).map(|i| vec![i]).collect();
    let inst = instance_from_lists(30, &lists);
    assert!(matches!(solve_naive(&inst), Err(SolveError::TooLarge(30))));
}
