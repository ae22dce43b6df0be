//! Exact minimum station cover.
//!
//! [`solve_naive`] enumerates subsets and serves as the test oracle.
//! [`solve_exact`] runs a branch-and-bound per connected component and
//! [`solve_pipeline`] puts the dominance reduction in front of it.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::model::{Instance, StationId};
use crate::reduce::{reduce_to_core, ReductionReport};

/// Largest instance accepted by [`solve_naive`].
pub const NAIVE_MAX_STATIONS: usize = 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("unknown station `{0}`")]
    UnknownStation(String),
    #[error("naive enumeration supports at most {NAIVE_MAX_STATIONS} stations, got {0}")]
    TooLarge(usize),
    #[error("search budget exhausted; best cover found has {} stations", best.len())]
    BudgetExhausted {
        /// A valid cover, not necessarily minimum.
        best: Vec<StationId>,
    },
}

/// Search limits for [`solve_exact`]. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn nodes(max_nodes: u64) -> Self {
        Self {
            max_nodes: Some(max_nodes),
            time_limit: None,
        }
    }

    pub fn time(limit: Duration) -> Self {
        Self {
            max_nodes: None,
            time_limit: Some(limit),
        }
    }
}

/// True iff every connection contains a station of `cover`.
pub fn covers(instance: &Instance, cover: &[StationId]) -> bool {
    let mut chosen = vec![false; instance.station_count()];
    for &s in cover {
        chosen[s as usize] = true;
    }
    instance
        .connections()
        .iter()
        .all(|c| c.iter().any(|&s| chosen[s as usize]))
}

/// Token-level cover check.
pub fn verify_cover<S: AsRef<str>>(instance: &Instance, cover: &[S]) -> Result<bool, SolveError> {
    let ids = cover
        .iter()
        .map(|t| {
            instance
                .station_id(t.as_ref())
                .ok_or_else(|| SolveError::UnknownStation(t.as_ref().to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(covers(instance, &ids))
}

/// Minimum cover by enumerating subsets by increasing size, each size in
/// lexicographic order, so ties go to the lexicographically smallest token
/// sequence.
pub fn solve_naive(instance: &Instance) -> Result<Vec<StationId>, SolveError> {
    let n = instance.station_count();
    if n > NAIVE_MAX_STATIONS {
        return Err(SolveError::TooLarge(n));
    }
    let masks: Vec<u32> = instance
        .connections()
        .iter()
        .map(|c| c.iter().fold(0u32, |m, &s| m | (1 << s)))
        .collect();
    for k in 0..=n {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            let chosen = combo.iter().fold(0u32, |m, &s| m | (1 << s));
            if masks.iter().all(|&m| m & chosen != 0) {
                return Ok(combo.iter().map(|&s| s as StationId).collect());
            }
            // Advance to the next k-combination in lexicographic order.
            let mut i = k;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if combo[i] < n - k + i {
                    combo[i] += 1;
                    for j in i + 1..k {
                        combo[j] = combo[j - 1] + 1;
                    }
                    i = usize::MAX;
                    break;
                }
            }
            if i != usize::MAX {
                break;
            }
        }
    }
    unreachable!("the full station set covers every connection")
}

struct Search<'a> {
    /// Connections as local station lists, ascending.
    conns: &'a [Vec<usize>],
    /// Local station -> connections.
    incidence: Vec<Vec<usize>>,
    hits: Vec<u32>,
    chosen: Vec<bool>,
    forbidden: Vec<bool>,
    current: Vec<usize>,
    best: Vec<usize>,
    nodes: u64,
    max_nodes: u64,
    deadline: Option<Instant>,
    exhausted: bool,
}

impl Search<'_> {
    fn select(&mut self, s: usize) {
        self.chosen[s] = true;
        self.current.push(s);
        for &c in &self.incidence[s] {
            self.hits[c] += 1;
        }
    }

    fn deselect(&mut self, s: usize) {
        self.chosen[s] = false;
        self.current.pop();
        for &c in &self.incidence[s] {
            self.hits[c] -= 1;
        }
    }

    /// Greedy packing of pairwise disjoint uncovered connections.
    fn lower_bound(&self, order: &mut Vec<(usize, usize)>, used: &mut [bool]) -> usize {
        order.clear();
        for (c, members) in self.conns.iter().enumerate() {
            if self.hits[c] == 0 {
                let free = members.iter().filter(|&&s| !self.forbidden[s]).count();
                order.push((free, c));
            }
        }
        order.sort_unstable();
        let mut bound = 0;
        let mut touched = Vec::new();
        for &(_, c) in order.iter() {
            let members = &self.conns[c];
            if members.iter().any(|&s| used[s]) {
                continue;
            }
            for &s in members {
                used[s] = true;
                touched.push(s);
            }
            bound += 1;
        }
        for s in touched {
            used[s] = false;
        }
        bound
    }

    fn out_of_budget(&mut self) -> bool {
        if self.exhausted {
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            self.exhausted = true;
        } else if let Some(deadline) = self.deadline {
            if self.nodes.is_multiple_of(1024) && Instant::now() >= deadline {
                self.exhausted = true;
            }
        }
        self.exhausted
    }

    fn run(&mut self, scratch: &mut Vec<(usize, usize)>, used: &mut Vec<bool>) {
        if self.out_of_budget() {
            return;
        }
        // Uncovered connection with the fewest selectable stations.
        let mut pick: Option<(usize, usize)> = None;
        for (c, members) in self.conns.iter().enumerate() {
            if self.hits[c] > 0 {
                continue;
            }
            let free = members.iter().filter(|&&s| !self.forbidden[s]).count();
            if free == 0 {
                return;
            }
            if pick.is_none_or(|(f, _)| free < f) {
                pick = Some((free, c));
            }
        }
        let Some((_, c)) = pick else {
            if self.current.len() < self.best.len() {
                self.best = self.current.clone();
            }
            return;
        };
        if self.current.len() + self.lower_bound(scratch, used) >= self.best.len() {
            return;
        }
        let branch: Vec<usize> = self.conns[c]
            .iter()
            .copied()
            .filter(|&s| !self.forbidden[s])
            .collect();
        // Branch i takes station i and excludes stations 0..i of this
        // connection, so every cover is explored at most once.
        let mut excluded = Vec::new();
        for s in branch {
            self.select(s);
            self.run(scratch, used);
            self.deselect(s);
            if self.exhausted {
                break;
            }
            self.forbidden[s] = true;
            excluded.push(s);
        }
        for s in excluded {
            self.forbidden[s] = false;
        }
    }
}

/// Greedy cover: repeatedly take the station hitting most uncovered
/// connections, smallest index on ties.
fn greedy_cover(conns: &[Vec<usize>], incidence: &[Vec<usize>]) -> Vec<usize> {
    let mut covered = vec![false; conns.len()];
    let mut left = conns.len();
    let mut cover = Vec::new();
    while left > 0 {
        let (s, _) = incidence
            .iter()
            .enumerate()
            .map(|(s, inc)| (s, inc.iter().filter(|&&c| !covered[c]).count()))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty component");
        for &c in &incidence[s] {
            if !covered[c] {
                covered[c] = true;
                left -= 1;
            }
        }
        cover.push(s);
    }
    cover
}

/// Exact minimum cover. Components are searched independently and their
/// optima concatenated. On budget exhaustion the error carries the best
/// cover found (optimal parts for finished components, greedy or partial
/// search results for the rest).
pub fn solve_exact(instance: &Instance, budget: Budget) -> Result<Vec<StationId>, SolveError> {
    let deadline = budget.time_limit.map(|t| Instant::now() + t);
    let mut nodes_left = budget.max_nodes.unwrap_or(u64::MAX);
    let mut cover = Vec::new();
    let mut exhausted = false;
    for (stations, conn_ids) in instance.component_partition() {
        if conn_ids.is_empty() {
            continue;
        }
        let mut local = vec![usize::MAX; instance.station_count()];
        for (i, &s) in stations.iter().enumerate() {
            local[s as usize] = i;
        }
        let conns: Vec<Vec<usize>> = conn_ids
            .iter()
            .map(|&c| {
                let mut v: Vec<usize> = instance.connection(c).iter().map(|&s| local[s as usize]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let mut incidence = vec![Vec::new(); stations.len()];
        for (c, members) in conns.iter().enumerate() {
            for &s in members {
                incidence[s].push(c);
            }
        }
        let best = if exhausted {
            greedy_cover(&conns, &incidence)
        } else {
            let mut search = Search {
                conns: &conns,
                hits: vec![0; conns.len()],
                chosen: vec![false; stations.len()],
                forbidden: vec![false; stations.len()],
                current: Vec::new(),
                best: greedy_cover(&conns, &incidence),
                incidence,
                nodes: 0,
                max_nodes: nodes_left,
                deadline,
                exhausted: false,
            };
            let mut scratch = Vec::new();
            let mut used = vec![false; stations.len()];
            search.run(&mut scratch, &mut used);
            nodes_left = nodes_left.saturating_sub(search.nodes);
            exhausted = search.exhausted;
            debug_assert!(search.chosen.iter().all(|&c| !c));
            search.best
        };
        cover.extend(best.into_iter().map(|s| stations[s]));
    }
    cover.sort_unstable();
    if exhausted {
        Err(SolveError::BudgetExhausted { best: cover })
    } else {
        Ok(cover)
    }
}

/// Reduce, solve the core exactly, and map the cover back to input ids.
pub fn solve_pipeline(
    instance: &Instance,
    budget: Budget,
) -> Result<(Vec<StationId>, ReductionReport), SolveError> {
    let report = reduce_to_core(instance);
    let map = |core_cover: Vec<StationId>| -> Vec<StationId> {
        let mut v: Vec<StationId> = core_cover
            .into_iter()
            .map(|s| report.core_station_origin[s as usize])
            .collect();
        v.sort_unstable();
        v
    };
    match solve_exact(&report.core, budget) {
        Ok(core_cover) => {
            let cover = map(core_cover);
            assert!(covers(instance, &cover), "core cover must cover the input");
            Ok((cover, report))
        }
        Err(SolveError::BudgetExhausted { best }) => Err(SolveError::BudgetExhausted { best: map(best) }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::read_hsd;

    fn tokens(i: &Instance, cover: &[StationId]) -> Vec<String> {
        cover.iter().map(|&s| i.station_name(s).to_string()).collect()
    }

    #[test]
    fn verify_cover_cases() {
        let tri = read_hsd("a b\nb c\na c\n").unwrap();
        assert!(verify_cover(&tri, &["a", "b"]).unwrap());
        assert!(!verify_cover(&tri, &["a"]).unwrap());
        assert_eq!(
            verify_cover(&tri, &["q"]),
            Err(SolveError::UnknownStation("q".into()))
        );
        let none = Instance::new(["a"], Vec::<Vec<&str>>::new()).unwrap();
        assert!(verify_cover::<&str>(&none, &[]).unwrap());
    }

    #[test]
    fn naive_cases() {
        let edge = read_hsd("a b\n").unwrap();
        assert_eq!(tokens(&edge, &solve_naive(&edge).unwrap()), ["a"]);
        let tri = read_hsd("a b\nb c\na c\n").unwrap();
        assert_eq!(tokens(&tri, &solve_naive(&tri).unwrap()), ["a", "b"]);
        let two = read_hsd("a b\nc d\n").unwrap();
        assert_eq!(solve_naive(&two).unwrap().len(), 2);
    }

    #[test]
    fn naive_rejects_large() {
        let names: Vec<String> = (0..26).map(|i| format!("s{i:02}")).collect();
        let i = Instance::new(&names, [names.clone()]).unwrap();
        assert_eq!(solve_naive(&i), Err(SolveError::TooLarge(26)));
    }

    #[test]
    fn exact_matches_naive_on_small_cases() {
        for text in [
            "a b\nb c\na c\n",
            "a b c\nc d\nd e\ne a\nb e\n",
            "a\nb\nc d\n",
            "a b\nc d\ne f\na c e\n",
        ] {
            let i = read_hsd(text).unwrap();
            let exact = solve_exact(&i, Budget::unlimited()).unwrap();
            assert!(covers(&i, &exact));
            assert_eq!(exact.len(), solve_naive(&i).unwrap().len(), "{text}");
        }
    }

    #[test]
    fn budget_exhaustion_reports_bound() {
        // Ten disjoint triangles in one component via a hub-free chain.
        let mut text = String::new();
        for k in 0..10 {
            text.push_str(&format!("a{k} b{k}\nb{k} c{k}\na{k} c{k}\nc{k} a{}\n", k + 1));
        }
        let i = read_hsd(&text).unwrap();
        match solve_exact(&i, Budget::nodes(5)) {
            Err(SolveError::BudgetExhausted { best }) => assert!(covers(&i, &best)),
            other => panic!("expected budget failure, got {other:?}"),
        }
    }

    #[test]
    fn pipeline_star_and_triangle() {
        let star = read_hsd("a b\na c\na d\n").unwrap();
        let (cover, report) = solve_pipeline(&star, Budget::unlimited()).unwrap();
        assert_eq!(tokens(&star, &cover), ["a"]);
        assert_eq!(report.removed_stations.len(), 3);
        let tri = read_hsd("a b\nb c\na c\n").unwrap();
        let (cover, report) = solve_pipeline(&tri, Budget::unlimited()).unwrap();
        assert_eq!(cover.len(), 2);
        assert!(report.removed_stations.is_empty() && report.removed_connections.is_empty());
    }

    #[test]
    fn empty_core_pipeline_takes_forced_singletons() {
        let path = read_hsd("a b\nb c\nc d\n").unwrap();
        let (cover, report) = solve_pipeline(&path, Budget::unlimited()).unwrap();
        assert_eq!(report.relative_core_complexity, 0.0);
        assert_eq!(cover.len(), report.core.connection_count());
        assert_eq!(cover.len(), solve_exact(&path, Budget::unlimited()).unwrap().len());
    }
}
