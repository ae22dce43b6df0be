//! Heterogeneity and locality measurements.
//!
//! Degree CCDFs, a discrete power-law fit (maximum likelihood exponent,
//! lower cutoff chosen by Kolmogorov-Smirnov distance), the bipartite
//! clustering coefficient, and the one-row summary used for tables.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graphview::relative_two_core_size;
use crate::model::{Instance, ModelError};
use crate::reduce::reduce_to_core;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("empty sample")]
    Empty,
    #[error("sample values must be positive integers")]
    NonPositive,
    #[error("no tail: need at least {MIN_TAIL} samples spanning two distinct values above some cutoff")]
    NoTail,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Smallest tail accepted when scanning cutoffs.
pub const MIN_TAIL: usize = 10;

/// Complementary CDF: for each distinct value `x`, ascending, the share of
/// samples that are at least `x`.
pub fn ccdf(values: &[u64]) -> Result<Vec<(u64, f64)>, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        out.push((v, (sorted.len() - i) as f64 / n));
        while i < sorted.len() && sorted[i] == v {
            i += 1;
        }
    }
    Ok(out)
}

const BERNOULLI_EVEN: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

/// Hurwitz zeta ζ(s, q) = Σ_{k≥0} (q + k)^(-s) for s > 1, q > 0, by
/// Euler-Maclaurin summation after a few explicit terms.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    debug_assert!(s > 1.0 && q > 0.0);
    const DIRECT: usize = 12;
    let mut sum = 0.0;
    for k in 0..DIRECT {
        sum += (q + k as f64).powf(-s);
    }
    let x = q + DIRECT as f64;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // Correction terms B_2j / (2j)! * s(s+1)...(s+2j-2) * x^(-s-2j+1).
    let mut rising = s; // s(s+1)...(s+2j-2)
    let mut factorial = 2.0; // (2j)!
    let mut power = x.powf(-s - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        sum += b / factorial * rising * power;
        let j = j as f64 + 1.0;
        rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        factorial *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
        power /= x * x;
    }
    sum
}

/// Result of [`fit_power_law`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub beta: f64,
    pub xmin: u64,
    pub ks: f64,
    pub n_tail: usize,
}

/// Distinct values with counts, ascending.
fn histogram(values: &[u64]) -> Vec<(u64, usize)> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let mut out: Vec<(u64, usize)> = Vec::new();
    for v in sorted {
        match out.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Maximizes the concave log-likelihood `-beta * log_sum - n * ln ζ(beta, xmin)`
/// by golden-section search.
fn mle_exponent(xmin: u64, n: f64, log_sum: f64) -> f64 {
    let q = xmin as f64;
    let objective = |beta: f64| -beta * log_sum - n * hurwitz_zeta(beta, q).ln();
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1.0 + 1e-6, 30.0);
    let mut x1 = hi - invphi * (hi - lo);
    let mut x2 = lo + invphi * (hi - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    while hi - lo > 1e-9 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = objective(x1);
        }
    }
    0.5 * (lo + hi)
}

/// KS distance between the tail's empirical CCDF and the fitted discrete
/// power law. Between consecutive observed values the empirical CCDF is
/// flat and the model decreasing, so checking `v` and `v + 1` for every
/// observed `v` covers every integer.
fn ks_distance(tail: &[(u64, usize)], beta: f64) -> f64 {
    let n: usize = tail.iter().map(|t| t.1).sum();
    let xmin = tail[0].0 as f64;
    let norm = hurwitz_zeta(beta, xmin);
    let model = |x: f64| hurwitz_zeta(beta, x) / norm;
    let mut at_least = n;
    let mut ks: f64 = 0.0;
    for &(v, count) in tail {
        let emp = at_least as f64 / n as f64;
        ks = ks.max((emp - model(v as f64)).abs());
        at_least -= count;
        let emp_next = at_least as f64 / n as f64;
        ks = ks.max((emp_next - model(v as f64 + 1.0)).abs());
    }
    ks.min(1.0)
}

/// Discrete power-law fit. For each observed value as cutoff (keeping at
/// least [`MIN_TAIL`] samples and two distinct values in the tail) the
/// exponent is the maximum likelihood estimate; the cutoff with the
/// smallest KS distance wins, the smaller cutoff on ties.
pub fn fit_power_law(values: &[u64]) -> Result<PowerLawFit, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    if values.contains(&0) {
        return Err(MetricsError::NonPositive);
    }
    let hist = histogram(values);
    let k = hist.len();
    // Suffix counts and log sums.
    let mut tail_n = vec![0usize; k + 1];
    let mut tail_log = vec![0f64; k + 1];
    for i in (0..k).rev() {
        tail_n[i] = tail_n[i + 1] + hist[i].1;
        tail_log[i] = tail_log[i + 1] + hist[i].1 as f64 * (hist[i].0 as f64).ln();
    }
    let mut best: Option<PowerLawFit> = None;
    for i in 0..k.saturating_sub(1) {
        if tail_n[i] < MIN_TAIL {
            break;
        }
        let xmin = hist[i].0;
        let beta = mle_exponent(xmin, tail_n[i] as f64, tail_log[i]);
        let ks = ks_distance(&hist[i..], beta);
        if best.is_none_or(|b| ks < b.ks) {
            best = Some(PowerLawFit {
                beta,
                xmin,
                ks,
                n_tail: tail_n[i],
            });
        }
    }
    best.ok_or(MetricsError::NoTail)
}

/// Station-connection incidence graph with deletion support.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    /// Station -> connections.
    pub left: Vec<Vec<u32>>,
    /// Connection -> stations.
    pub right: Vec<Vec<u32>>,
}

impl BipartiteGraph {
    pub fn from_instance(instance: &Instance) -> Self {
        let left = (0..instance.station_count() as u32)
            .map(|s| instance.incidence(s).to_vec())
            .collect();
        let right = (0..instance.connection_count())
            .map(|c| instance.connection_set(c))
            .collect();
        Self { left, right }
    }

    /// From an edge list of (left, right) pairs; duplicate pairs merged.
    pub fn from_edges(n_left: usize, n_right: usize, edges: &[(u32, u32)]) -> Self {
        let mut left = vec![Vec::new(); n_left];
        let mut right = vec![Vec::new(); n_right];
        for &(s, c) in edges {
            left[s as usize].push(c);
            right[c as usize].push(s);
        }
        for adj in left.iter_mut().chain(right.iter_mut()) {
            adj.sort_unstable();
            adj.dedup();
        }
        Self { left, right }
    }

    pub fn edge_count(&self) -> usize {
        self.left.iter().map(Vec::len).sum()
    }

    /// 2-core on both sides: repeatedly delete nodes of degree at most 1.
    /// Deleted nodes keep their slot with an empty adjacency.
    pub fn two_core(&self) -> Self {
        let mut left_alive = vec![true; self.left.len()];
        let mut right_alive = vec![true; self.right.len()];
        let mut left_deg: Vec<usize> = self.left.iter().map(Vec::len).collect();
        let mut right_deg: Vec<usize> = self.right.iter().map(Vec::len).collect();
        // (is_left, id)
        let mut stack: Vec<(bool, u32)> = Vec::new();
        stack.extend((0..self.left.len() as u32).filter(|&s| left_deg[s as usize] <= 1).map(|s| (true, s)));
        stack.extend((0..self.right.len() as u32).filter(|&c| right_deg[c as usize] <= 1).map(|c| (false, c)));
        while let Some((is_left, v)) = stack.pop() {
            if is_left {
                if !left_alive[v as usize] {
                    continue;
                }
                left_alive[v as usize] = false;
                for &c in &self.left[v as usize] {
                    if right_alive[c as usize] {
                        right_deg[c as usize] -= 1;
                        if right_deg[c as usize] == 1 {
                            stack.push((false, c));
                        }
                    }
                }
            } else {
                if !right_alive[v as usize] {
                    continue;
                }
                right_alive[v as usize] = false;
                for &s in &self.right[v as usize] {
                    if left_alive[s as usize] {
                        left_deg[s as usize] -= 1;
                        if left_deg[s as usize] == 1 {
                            stack.push((true, s));
                        }
                    }
                }
            }
        }
        let left = self
            .left
            .iter()
            .enumerate()
            .map(|(s, adj)| {
                if left_alive[s] {
                    adj.iter().copied().filter(|&c| right_alive[c as usize]).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let right = self
            .right
            .iter()
            .enumerate()
            .map(|(c, adj)| {
                if right_alive[c] {
                    adj.iter().copied().filter(|&s| left_alive[s as usize]).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self { left, right }
    }

    /// Paths with three edges: each is fixed by its middle edge (s, c) plus
    /// another neighbor of s and another neighbor of c.
    pub fn count_paths3(&self) -> u64 {
        let mut total = 0u64;
        for (s, adj) in self.left.iter().enumerate() {
            let ds = adj.len() as u64;
            for &c in adj {
                let dc = self.right[c as usize].len() as u64;
                debug_assert!(self.right[c as usize].contains(&(s as u32)));
                total += (ds - 1) * (dc - 1);
            }
        }
        total
    }

    /// 4-cycles: each is fixed by its two stations and two of their common
    /// connections.
    pub fn count_cycles4(&self) -> u64 {
        let n = self.left.len();
        let mut common = vec![0u64; n];
        let mut touched = Vec::new();
        let mut total = 0u64;
        for s in 0..n {
            for &c in &self.left[s] {
                for &t in &self.right[c as usize] {
                    if (t as usize) > s {
                        if common[t as usize] == 0 {
                            touched.push(t as usize);
                        }
                        common[t as usize] += 1;
                    }
                }
            }
            for t in touched.drain(..) {
                let k = common[t];
                total += k * (k - 1) / 2;
                common[t] = 0;
            }
        }
        total
    }
}

/// Bipartite clustering coefficient after 2-core normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clustering {
    pub kappa: f64,
    /// False when the normalized graph has no 3-path; `kappa` is then 0.
    pub defined: bool,
    pub paths3: u64,
    pub cycles4: u64,
}

/// κ = 4 · #C4 / #P3 on the 2-core of the station-connection graph.
pub fn bipartite_clustering(instance: &Instance) -> Clustering {
    let core = BipartiteGraph::from_instance(instance).two_core();
    let paths3 = core.count_paths3();
    let cycles4 = core.count_cycles4();
    if paths3 == 0 {
        return Clustering {
            kappa: 0.0,
            defined: false,
            paths3,
            cycles4,
        };
    }
    Clustering {
        kappa: 4.0 * cycles4 as f64 / paths3 as f64,
        defined: true,
        paths3,
        cycles4,
    }
}

/// One table row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub stations: usize,
    pub ratio: f64,
    pub delta_s: f64,
    pub beta_hat: Option<f64>,
    pub ks: Option<f64>,
    pub kappa: f64,
    pub kappa_defined: bool,
    pub two_core_frac: f64,
    pub core_frac: f64,
    pub complexity: usize,
}

pub const METRICS_CSV_HEADER: &str = "stations,ratio,delta_s,beta,ks,kappa,two_core_frac,core_frac";

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_default()
}

impl MetricsReport {
    /// The row in [`METRICS_CSV_HEADER`] order; missing fit values are empty.
    pub fn csv_row(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{},{:.3},{:.4},{},{},{:.4},{:.6},{:.6}",
            self.stations,
            self.ratio,
            self.delta_s,
            opt(self.beta_hat, 4),
            opt(self.ks, 4),
            self.kappa,
            self.two_core_frac,
            self.core_frac
        );
        out
    }
}

/// All table columns for one instance (normally its largest component).
pub fn metrics_report(instance: &Instance) -> Result<MetricsReport, MetricsError> {
    let degrees = instance.degree_stats()?;
    let positive: Vec<u64> = degrees
        .station_degrees
        .iter()
        .filter(|&&d| d > 0)
        .map(|&d| d as u64)
        .collect();
    let fit = fit_power_law(&positive).ok();
    let clustering = bipartite_clustering(instance);
    let report = reduce_to_core(instance);
    Ok(MetricsReport {
        stations: instance.station_count(),
        ratio: degrees.ratio,
        delta_s: degrees.delta_s,
        beta_hat: fit.map(|f| f.beta),
        ks: fit.map(|f| f.ks),
        kappa: clustering.kappa,
        kappa_defined: clustering.defined,
        two_core_frac: relative_two_core_size(instance),
        core_frac: report.relative_core_complexity,
        complexity: report.complexity,
    })
}
