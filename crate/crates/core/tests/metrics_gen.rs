mod common;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stationcover::gen::{calibrate_a, draw_memberships, generate, GeneratorParams, SampledWorld};
use stationcover::metrics::{bipartite_clustering, fit_power_law, BipartiteGraph};
use stationcover::Instance;

#[test]
fn fast_counts_match_enumeration_on_small_bipartite_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let nl = rng.gen_range(1..=7);
        let nr = rng.gen_range(1..=12 - nl);
        let p = rng.gen_range(0.2..0.9);
        let edges: Vec<(u32, u32)> = (0..nl as u32)
            .flat_map(|s| (0..nr as u32).map(move |c| (s, c)))
            .filter(|_| rng.gen::<f64>() < p)
            .collect();
        let g = BipartiteGraph::from_edges(nl, nr, &edges);
        let (paths, cycles) = enumerate_paths_and_cycles(&g);
        assert_eq!(g.count_paths3(), paths);
        assert_eq!(g.count_cycles4(), cycles);
        assert!(4 * cycles <= paths || paths == 0);
    }
}

#[test]
fn complete_bipartite_two_by_three_has_kappa_one() {
    let inst = Instance::from_connections([["a", "b"], ["a", "b"], ["a", "b"]]).unwrap();
    let c = bipartite_clustering(&inst);
    assert!(c.defined);
    assert_eq!((c.paths3, c.cycles4), (12, 3));
    assert_eq!(c.kappa, 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn kappa_in_unit_interval_and_relabel_invariant(inst in arb_instance(14, 12), seed in any::<u64>()) {
        let c = bipartite_clustering(&inst);
        prop_assert!((0.0..=1.0).contains(&c.kappa));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..inst.station_count()).collect();
        perm.shuffle(&mut rng);
        let mut conns: Vec<Vec<String>> = inst
            .connections()
            .iter()
            .map(|c| c.iter().map(|&s| format!("r{:03}", perm[s as usize])).collect())
            .collect();
        conns.shuffle(&mut rng);
        let relabeled = Instance::from_connections(conns).unwrap();
        let d = bipartite_clustering(&relabeled);
        prop_assert_eq!((c.paths3, c.cycles4, c.defined), (d.paths3, d.cycles4, d.defined));
        prop_assert_eq!(c.kappa, d.kappa);
    }

    #[test]
    fn duplicating_samples_keeps_the_fit(
        counts in prop::collection::btree_map(1u64..60, 10usize..40, 2..12),
    ) {
        let values: Vec<u64> = counts.iter().flat_map(|(&v, &k)| std::iter::repeat_n(v, k)).collect();
        let doubled: Vec<u64> = values.iter().chain(values.iter()).copied().collect();
        let a = fit_power_law(&values).unwrap();
        let b = fit_power_law(&doubled).unwrap();
        prop_assert_eq!(a.xmin, b.xmin);
        prop_assert_eq!(a.beta, b.beta);
        prop_assert_eq!(a.ks, b.ks);
        prop_assert!(a.beta > 1.0 && (0.0..=1.0).contains(&a.ks));
        prop_assert!(a.xmin >= *counts.keys().next().unwrap());
    }
}

#[test]
fn fit_recovers_exponent_of_synthetic_power_law() {
    let law = DiscretePowerLaw::new(2.5, 1_000_000);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut betas = Vec::new();
    for _ in 0..10 {
        let sample: Vec<u64> = (0..3000).map(|_| law.sample(&mut rng)).collect();
        betas.push(fit_power_law(&sample).unwrap().beta);
    }
    let m = median(betas);
    assert!((m - 2.5).abs() < 0.15, "median beta {m}");
}

#[test]
fn generation_is_deterministic_per_seed() {
    let mut p = GeneratorParams::main(3.0, 0.3, 17);
    p.n_stations = 500;
    let a = generate(&p).unwrap();
    let b = generate(&p).unwrap();
    assert_eq!(a.full, b.full);
    assert_eq!(a.world, b.world);
    assert_eq!(a.world.a.to_bits(), b.world.a.to_bits());
}

#[test]
fn membership_frequencies_match_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut world = SampledWorld::sample(20, 2, 3.0, &mut rng).unwrap();
    let temperature = 0.6;
    world.a = calibrate_a(&world, 0.4, temperature).unwrap();
    let draws = 10_000;
    let mut hits = vec![vec![0usize; 20]; 2];
    let mut counted = 0;
    let mut seed = 0u64;
    while counted < draws {
        seed += 1;
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let conns = draw_memberships(&world, temperature, &mut r);
        // Empty connections are dropped, which would misalign indices;
        // keep only draws where both survived.
        if conns.len() != 2 {
            continue;
        }
        counted += 1;
        for (c, members) in conns.iter().enumerate() {
            for &s in members {
                hits[c][s as usize] += 1;
            }
        }
    }
    // Condition on both connections being non-empty.
    let p_nonempty = |c: usize| 1.0 - (0..20).map(|s| 1.0 - world.probability(s, c, temperature)).product::<f64>();
    for c in 0..2 {
        for s in 0..20 {
            let p = world.probability(s, c, temperature) / p_nonempty(c);
            let p = p.min(1.0);
            let sd = (draws as f64 * p * (1.0 - p)).sqrt();
            let got = hits[c][s] as f64;
            assert!(
                (got - draws as f64 * p).abs() <= 3.0 * sd.max(0.5),
                "pair ({s},{c}): {got} vs {}",
                draws as f64 * p
            );
        }
    }
}

fn mean_kappa(beta: f64, t: f64, samples: u64) -> f64 {
    (0..samples)
        .map(|k| {
            let g = generate(&GeneratorParams::main(beta, t, 1000 + k)).unwrap();
            bipartite_clustering(&g.largest).kappa
        })
        .sum::<f64>()
        / samples as f64
}

#[test]
fn clustering_falls_with_temperature() {
    for beta in [2.5, 3.5, f64::INFINITY] {
        let kappas: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&t| mean_kappa(beta, t, 10)).collect();
        for w in kappas.windows(2) {
            assert!(w[1] <= w[0], "beta {beta}: {kappas:?}");
        }
    }
}

#[test]
fn fitted_exponent_tracks_the_parameter() {
    for (beta, t) in [(2.5, 0.5), (3.0, 0.5), (3.5, 0.5)] {
        let est: Vec<f64> = (0..5)
            .map(|k| {
                let g = generate(&GeneratorParams::main(beta, t, 50 + k)).unwrap();
                let degrees: Vec<u64> =
                    g.largest.degree_stats().unwrap().station_degrees.iter().map(|&d| d as u64).collect();
                fit_power_law(&degrees).unwrap().beta
            })
            .collect();
        let m = median(est);
        assert!((m - beta).abs() <= 0.5, "beta {beta}: median estimate {m}");
    }
    // Larger exponents drift upwards; only the direction is checked.
    let high = |beta: f64| {
        let g = generate(&GeneratorParams::main(beta, 0.5, 7)).unwrap();
        let d: Vec<u64> = g.largest.degree_stats().unwrap().station_degrees.iter().map(|&d| d as u64).collect();
        fit_power_law(&d).unwrap().beta
    };
    assert!(high(5.0) > high(3.0));
}
