//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use stationcover::graphview::Graph;
use stationcover::metrics::BipartiteGraph;
use stationcover::{Instance, StationId};

pub fn token(i: usize) -> String {
    format!("v{i:03}")
}

/// Instance over `n` stations from index lists; indices are taken mod `n`.
/// Empty lists are dropped and an all-empty input yields one singleton.
pub fn instance_from_lists(n: usize, lists: &[Vec<usize>]) -> Instance {
    let names: Vec<String> = (0..n).map(token).collect();
    let mut conns: Vec<Vec<StationId>> = lists
        .iter()
        .filter(|l| !l.is_empty())
        .map(|l| l.iter().map(|&i| (i % n) as StationId).collect())
        .collect();
    if conns.is_empty() {
        conns.push(vec![0]);
    }
    Instance::from_indexed(names, conns).unwrap()
}

/// Random instance: each connection takes every station with probability
/// `density`, at least one, in shuffled sequence order.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, m: usize, density: f64) -> Instance {
    let lists: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let mut l: Vec<usize> = (0..n).filter(|_| rng.gen::<f64>() < density).collect();
            if l.is_empty() {
                l.push(rng.gen_range(0..n));
            }
            l.shuffle(rng);
            l
        })
        .collect();
    instance_from_lists(n, &lists)
}

/// Mixed-density random instance with 1..=max_n stations.
pub fn mixed_instance<R: Rng>(rng: &mut R, max_n: usize) -> Instance {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=2 * n + 2);
    let density = [0.1, 0.2, 0.35, 0.5][rng.gen_range(0..4)];
    random_instance(rng, n, m, density)
}

prop_compose! {
    pub fn arb_instance(max_n: usize, max_m: usize)
        (n in 1..=max_n)
        (lists in prop::collection::vec(prop::collection::vec(0..n, 1..=n.min(6)), 1..=max_m), n in Just(n))
        -> Instance
    {
        instance_from_lists(n, &lists)
    }
}

/// Minimum cover size by bitmask enumeration in increasing popcount.
pub fn brute_force_optimum(instance: &Instance) -> usize {
    let n = instance.station_count();
    assert!(n <= 20);
    let masks: Vec<u32> = instance
        .connections()
        .iter()
        .map(|c| c.iter().fold(0u32, |m, &s| m | 1 << s))
        .collect();
    let mut best = n;
    for set in 0u32..(1u32 << n) {
        let k = set.count_ones() as usize;
        if k < best && masks.iter().all(|&m| m & set != 0) {
            best = k;
        }
    }
    best
}

/// Connections as sorted station-name sets.
pub fn named_sets(instance: &Instance) -> Vec<BTreeSet<String>> {
    instance
        .connections()
        .iter()
        .map(|c| c.iter().map(|&s| instance.station_name(s).to_string()).collect())
        .collect()
}

/// Random connected simple graph on `n` vertices containing at least one
/// cycle: a random tree plus `extra` (≥ 1) non-tree edges.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Graph {
    assert!(n >= 3);
    let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        let v = order[i];
        edges.insert((parent.min(v), parent.max(v)));
    }
    let target = edges.len() + extra.max(1);
    while edges.len() < target {
        let u = rng.gen_range(0..n as u32);
        let v = rng.gen_range(0..n as u32);
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    let names: Vec<String> = (0..n).map(token).collect();
    Graph::new(names, edges)
}

/// 2-core vertex set by repeated leaf deletion over plain adjacency sets.
pub fn two_core_names(graph: &Graph) -> BTreeSet<String> {
    let n = graph.vertex_count();
    let mut adj: Vec<BTreeSet<u32>> = (0..n as u32).map(|v| graph.neighbors(v).collect()).collect();
    let mut alive = vec![true; n];
    loop {
        let leaf = (0..n).find(|&v| alive[v] && adj[v].len() < 2);
        let Some(v) = leaf else { break };
        alive[v] = false;
        for u in std::mem::take(&mut adj[v]) {
            adj[u as usize].remove(&(v as u32));
        }
    }
    (0..n)
        .filter(|&v| alive[v])
        .map(|v| graph.name(v as u32).to_string())
        .collect()
}

/// 3-edge paths and 4-cycles of a bipartite graph by enumerating ordered
/// vertex 4-tuples. Vertices `0..left` are the left side.
pub fn enumerate_paths_and_cycles(g: &BipartiteGraph) -> (u64, u64) {
    let nl = g.left.len();
    let n = nl + g.right.len();
    let mut adj = vec![vec![false; n]; n];
    for (s, cs) in g.left.iter().enumerate() {
        for &c in cs {
            adj[s][nl + c as usize] = true;
            adj[nl + c as usize][s] = true;
        }
    }
    let (mut paths, mut cycles) = (0u64, 0u64);
    for a in 0..n {
        for b in 0..n {
            if !adj[a][b] {
                continue;
            }
            for c in 0..n {
                if c == a || !adj[b][c] {
                    continue;
                }
                for d in 0..n {
                    if d == a || d == b || !adj[c][d] {
                        continue;
                    }
                    paths += 1;
                    if adj[d][a] {
                        cycles += 1;
                    }
                }
            }
        }
    }
    // Each path is seen in both directions, each cycle from 4 starts x 2 directions.
    (paths / 2, cycles / 8)
}

/// Evaluates a 3-CNF formula by enumerating all assignments.
pub fn truth_table_sat(num_vars: usize, clauses: &[[i32; 3]]) -> bool {
    (0u32..1 << num_vars).any(|assign| {
        clauses.iter().all(|cl| {
            cl.iter().any(|&lit| {
                let v = lit.unsigned_abs() - 1;
                let val = assign >> v & 1 == 1;
                if lit > 0 {
                    val
                } else {
                    !val
                }
            })
        })
    })
}

/// Discrete power law on x ≥ 1 by inverse CDF over an explicit table of
/// `x^-beta` up to `cutoff`. Mass beyond the cutoff is dropped; for
/// beta = 3.5 and cutoff 10^6 it is below 1e-15.
pub struct DiscretePowerLaw {
    cdf: Vec<f64>,
}

impl DiscretePowerLaw {
    pub fn new(beta: f64, cutoff: usize) -> Self {
        let mut cdf = Vec::with_capacity(cutoff);
        let mut acc = 0.0;
        for x in 1..=cutoff {
            acc += (x as f64).powf(-beta);
            cdf.push(acc);
        }
        let total = acc;
        cdf.iter_mut().for_each(|v| *v /= total);
        Self { cdf }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c < u) as u64 + 1
    }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for k in i..=j {
                r[idx[k]] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
