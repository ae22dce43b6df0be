//! Weihe's dominance rules.
//!
//! A station `s1` dominates `s2` when every connection containing `s2` also
//! contains `s1`; `s2` can then be deleted from the instance. A connection
//! `c1` dominates `c2` when `c1 ⊆ c2`; `c2` can then be dropped. Both rules
//! are applied until neither fires. The result, the core, has the same
//! optimum, and a cover of the core is a cover of the input.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{Instance, StationId};

/// A deleted station and the station that dominated it at deletion time.
/// Ids refer to the input instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StationRemoval {
    pub station: StationId,
    pub dominated_by: StationId,
}

/// A dropped connection and the connection that dominated it. Indices refer
/// to the input instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConnectionRemoval {
    pub connection: usize,
    pub dominated_by: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub core: Instance,
    /// Input station id of every core station.
    pub core_station_origin: Vec<StationId>,
    /// Input connection index of every core connection.
    pub core_connection_origin: Vec<usize>,
    pub removed_stations: Vec<StationRemoval>,
    pub removed_connections: Vec<ConnectionRemoval>,
    pub input_station_count: usize,
    /// Largest station count over the core's components.
    pub complexity: usize,
    /// Stations that still need search, relative to the input station count.
    pub relative_core_complexity: f64,
    /// Share of input stations in the 2-core of the station graph, when
    /// computed (see [`crate::graphview::relative_two_core_size`]).
    pub relative_two_core_size: Option<f64>,
}

/// Complexity figures of a core.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreComplexity {
    pub complexity: usize,
    /// Stations in core components with at least two stations. A one-station
    /// component is solved by taking that station.
    pub search_stations: usize,
    pub relative: f64,
}

/// Complexity of `core`, with the relative value taken against
/// `input_station_count` (the station count before reduction).
pub fn complexity_stats(core: &Instance, input_station_count: usize) -> CoreComplexity {
    let parts = core.component_partition();
    let complexity = parts.first().map_or(0, |p| p.0.len());
    let search_stations: usize = parts
        .iter()
        .map(|p| p.0.len())
        .filter(|&n| n >= 2)
        .sum();
    let relative = if input_station_count == 0 {
        0.0
    } else {
        search_stations as f64 / input_station_count as f64
    };
    CoreComplexity {
        complexity,
        search_stations,
        relative,
    }
}

/// Mutable incidence structure with deletions.
struct Work {
    /// Sorted alive stations per connection.
    members: Vec<Vec<StationId>>,
    /// Sorted alive connections per station.
    incidence: Vec<Vec<u32>>,
    station_alive: Vec<bool>,
    connection_alive: Vec<bool>,
    alive_stations: usize,
    removed_stations: Vec<StationRemoval>,
    removed_connections: Vec<ConnectionRemoval>,
}

fn is_subset<T: Ord>(small: &[T], big: &[T]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut j = 0;
    for x in small {
        while j < big.len() && big[j] < *x {
            j += 1;
        }
        if j == big.len() || big[j] != *x {
            return false;
        }
        j += 1;
    }
    true
}

fn remove_sorted<T: Ord>(v: &mut Vec<T>, x: &T) {
    if let Ok(pos) = v.binary_search(x) {
        v.remove(pos);
    }
}

impl Work {
    fn new(instance: &Instance) -> Self {
        let members: Vec<Vec<StationId>> = (0..instance.connection_count())
            .map(|c| instance.connection_set(c))
            .collect();
        let incidence = (0..instance.station_count() as StationId)
            .map(|s| instance.incidence(s).to_vec())
            .collect();
        Self {
            members,
            incidence,
            station_alive: vec![true; instance.station_count()],
            connection_alive: vec![true; instance.connection_count()],
            alive_stations: instance.station_count(),
            removed_stations: Vec::new(),
            removed_connections: Vec::new(),
        }
    }

    fn remove_station(&mut self, station: StationId, dominated_by: StationId) {
        for &c in &self.incidence[station as usize] {
            remove_sorted(&mut self.members[c as usize], &station);
            debug_assert!(!self.members[c as usize].is_empty());
        }
        self.incidence[station as usize].clear();
        self.station_alive[station as usize] = false;
        self.alive_stations -= 1;
        self.removed_stations.push(StationRemoval {
            station,
            dominated_by,
        });
    }

    fn remove_connection(&mut self, connection: usize, dominated_by: usize) {
        let c = connection as u32;
        for &s in &self.members[connection] {
            remove_sorted(&mut self.incidence[s as usize], &c);
        }
        self.members[connection].clear();
        self.connection_alive[connection] = false;
        self.removed_connections.push(ConnectionRemoval {
            connection,
            dominated_by,
        });
    }

    fn station_dominates(&self, s1: StationId, s2: StationId) -> bool {
        s1 != s2
            && self.station_alive[s1 as usize]
            && is_subset(&self.incidence[s2 as usize], &self.incidence[s1 as usize])
    }

    fn connection_dominates(&self, c1: usize, c2: usize) -> bool {
        c1 != c2
            && self.connection_alive[c1]
            && self.connection_alive[c2]
            && is_subset(&self.members[c1], &self.members[c2])
    }

    /// Smallest-token alive station that dominates `s2` under the
    /// deterministic tie rule (equal incidence: only a smaller token counts).
    fn station_witness(&self, s2: StationId) -> Option<StationId> {
        let inc2 = &self.incidence[s2 as usize];
        if inc2.is_empty() {
            // Dominated by any other station.
            return (0..self.station_alive.len() as StationId)
                .find(|&s| s != s2 && self.station_alive[s as usize]);
        }
        // Every dominator lies in the smallest connection containing s2.
        let pivot = inc2
            .iter()
            .min_by_key(|&&c| self.members[c as usize].len())
            .copied()
            .unwrap();
        let d2 = inc2.len();
        self.members[pivot as usize].iter().copied().find(|&s1| {
            let d1 = self.incidence[s1 as usize].len();
            s1 != s2 && (d1 > d2 || (d1 == d2 && s1 < s2)) && self.station_dominates(s1, s2)
        })
    }

    fn station_pass(&mut self) -> bool {
        let mut changed = false;
        for s2 in 0..self.station_alive.len() as StationId {
            if !self.station_alive[s2 as usize] {
                continue;
            }
            if let Some(s1) = self.station_witness(s2) {
                self.remove_station(s2, s1);
                changed = true;
            }
        }
        changed
    }

    fn connection_pass(&mut self) -> bool {
        let mut changed = false;
        for c1 in 0..self.connection_alive.len() {
            if !self.connection_alive[c1] {
                continue;
            }
            // Every superset of c1 contains its rarest station.
            let pivot = *self.members[c1]
                .iter()
                .min_by_key(|&&s| self.incidence[s as usize].len())
                .unwrap();
            let candidates = self.incidence[pivot as usize].clone();
            let len1 = self.members[c1].len();
            for c2 in candidates {
                let c2 = c2 as usize;
                if c2 == c1 || !self.connection_alive[c2] {
                    continue;
                }
                let len2 = self.members[c2].len();
                if len2 < len1 || (len2 == len1 && c2 < c1) {
                    continue;
                }
                if self.connection_dominates(c1, c2) {
                    self.remove_connection(c2, c1);
                    changed = true;
                }
            }
        }
        changed
    }

    fn finish(self, instance: &Instance) -> ReductionReport {
        let (core, core_connection_origin, core_station_origin) =
            instance.restrict(&self.station_alive, &self.connection_alive);
        let stats = complexity_stats(&core, instance.station_count());
        ReductionReport {
            core,
            core_station_origin,
            core_connection_origin,
            removed_stations: self.removed_stations,
            removed_connections: self.removed_connections,
            input_station_count: instance.station_count(),
            complexity: stats.complexity,
            relative_core_complexity: stats.relative,
            relative_two_core_size: None,
        }
    }
}

/// Applies both dominance rules to a fixpoint, alternating full station and
/// connection passes. Among mutually dominating elements the larger token
/// (or larger connection index) is removed.
pub fn reduce_to_core(instance: &Instance) -> ReductionReport {
    let mut work = Work::new(instance);
    loop {
        let stations = work.station_pass();
        let connections = work.connection_pass();
        if !stations && !connections {
            break;
        }
    }
    work.finish(instance)
}

/// Applies single removals in a random order until no rule fires.
///
/// Each step lists every currently applicable removal (mutual dominance in
/// either direction included) and applies one chosen uniformly. Quadratic
/// per step; meant for checking order independence on small instances.
pub fn reduce_in_random_order<R: Rng>(instance: &Instance, rng: &mut R) -> ReductionReport {
    enum Step {
        Station(StationId, StationId),
        Connection(usize, usize),
    }
    let mut work = Work::new(instance);
    loop {
        let mut steps = Vec::new();
        let n = work.station_alive.len() as StationId;
        for s2 in (0..n).filter(|&s| work.station_alive[s as usize]) {
            if let Some(s1) = (0..n).find(|&s1| work.station_dominates(s1, s2)) {
                steps.push(Step::Station(s2, s1));
            }
        }
        let m = work.connection_alive.len();
        for c2 in (0..m).filter(|&c| work.connection_alive[c]) {
            if let Some(c1) = (0..m).find(|&c1| work.connection_dominates(c1, c2)) {
                steps.push(Step::Connection(c2, c1));
            }
        }
        match steps.choose(rng) {
            None => break,
            Some(&Step::Station(s2, s1)) => work.remove_station(s2, s1),
            Some(&Step::Connection(c2, c1)) => work.remove_connection(c2, c1),
        }
    }
    work.finish(instance)
}

/// True when neither rule applies anywhere in `instance`.
pub fn is_reduced(instance: &Instance) -> bool {
    let work = Work::new(instance);
    let n = instance.station_count() as StationId;
    let m = instance.connection_count();
    let station_free =
        (0..n).all(|s2| (0..n).all(|s1| !work.station_dominates(s1, s2)));
    let connection_free = (0..m).all(|c2| (0..m).all(|c1| !work.connection_dominates(c1, c2)));
    station_free && connection_free
}

/// Structured text for the CLI: summary lines, then one line per removal.
pub fn format_report(instance: &Instance, report: &ReductionReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "input_stations {}", instance.station_count());
    let _ = writeln!(out, "input_connections {}", instance.connection_count());
    let _ = writeln!(out, "core_stations {}", report.core.station_count());
    let _ = writeln!(out, "core_connections {}", report.core.connection_count());
    let _ = writeln!(out, "complexity {}", report.complexity);
    let _ = writeln!(
        out,
        "relative_core_complexity {:.6}",
        report.relative_core_complexity
    );
    if let Some(two) = report.relative_two_core_size {
        let _ = writeln!(out, "relative_two_core_size {two:.6}");
    }
    for r in &report.removed_stations {
        let _ = writeln!(
            out,
            "station {} dominated_by {}",
            instance.station_name(r.station),
            instance.station_name(r.dominated_by)
        );
    }
    for r in &report.removed_connections {
        let _ = writeln!(
            out,
            "connection {} dominated_by {}",
            r.connection, r.dominated_by
        );
    }
    out
}
