//! Station cover instances: stations, ordered connections and the derived
//! station/connection incidence.
//!
//! Stations are opaque string tokens. Internally they are stored sorted, so a
//! [`StationId`] order is the token order and every tie-break in the crate can
//! work on plain indices.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

/// Index of a station inside one [`Instance`]. Ids follow token order.
pub type StationId = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("empty connection (connection {index})")]
    EmptyConnection { index: usize },
    #[error("connection {index} references unknown station `{token}`")]
    UnknownStation { index: usize, token: String },
    #[error("invalid station token `{token}`: tokens must be non-empty and free of whitespace")]
    InvalidToken { token: String },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("instance has no stations")]
    EmptyInstance,
}

/// A station cover instance.
///
/// Connections keep their sequence order; hitting-set code uses
/// [`Instance::connection_set`] where order is irrelevant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    stations: Vec<String>,
    connections: Vec<Vec<StationId>>,
    incidence: Vec<Vec<u32>>,
}

fn valid_token(token: &str) -> bool {
    !token.is_empty() && !token.chars().any(char::is_whitespace)
}

/// Drops repeated stations, keeping the first occurrence.
fn dedup_in_order(seq: &mut Vec<StationId>) {
    let mut seen = BTreeSet::new();
    seq.retain(|s| seen.insert(*s));
}

impl Instance {
    /// Builds an instance from an explicit station set and connections over it.
    ///
    /// Stations not used by any connection are kept as isolated stations.
    pub fn new<S, C, T>(stations: S, connections: C) -> Result<Self, ModelError>
    where
        S: IntoIterator,
        S::Item: AsRef<str>,
        C: IntoIterator<Item = T>,
        T: IntoIterator,
        T::Item: AsRef<str>,
    {
        let mut names = Vec::new();
        for s in stations {
            let s = s.as_ref();
            if !valid_token(s) {
                return Err(ModelError::InvalidToken { token: s.to_string() });
            }
            names.push(s.to_string());
        }
        names.sort();
        names.dedup();
        let mut conns = Vec::new();
        for (index, conn) in connections.into_iter().enumerate() {
            let mut seq = Vec::new();
            for token in conn {
                let token = token.as_ref();
                match names.binary_search_by(|n| n.as_str().cmp(token)) {
                    Ok(id) => seq.push(id as StationId),
                    Err(_) => {
                        return Err(ModelError::UnknownStation {
                            index,
                            token: token.to_string(),
                        })
                    }
                }
            }
            if seq.is_empty() {
                return Err(ModelError::EmptyConnection { index });
            }
            conns.push(seq);
        }
        Self::from_indexed(names, conns)
    }

    /// Builds an instance whose station set is exactly the stations used by
    /// the connections.
    pub fn from_connections<C, T>(connections: C) -> Result<Self, ModelError>
    where
        C: IntoIterator<Item = T>,
        T: IntoIterator,
        T::Item: AsRef<str>,
    {
        let conns: Vec<Vec<String>> = connections
            .into_iter()
            .map(|c| c.into_iter().map(|s| s.as_ref().to_string()).collect())
            .collect();
        let stations: BTreeSet<&str> = conns.iter().flatten().map(String::as_str).collect();
        Self::new(stations, &conns)
    }

    /// Builds an instance from sorted, unique station names and connections
    /// given as indices into them.
    pub fn from_indexed(
        stations: Vec<String>,
        mut connections: Vec<Vec<StationId>>,
    ) -> Result<Self, ModelError> {
        if let Some(bad) = stations.iter().find(|s| !valid_token(s)) {
            return Err(ModelError::InvalidToken { token: bad.clone() });
        }
        assert!(
            stations.windows(2).all(|w| w[0] < w[1]),
            "station names must be sorted and unique"
        );
        let n = stations.len();
        let mut incidence = vec![Vec::new(); n];
        for (index, seq) in connections.iter_mut().enumerate() {
            if seq.is_empty() {
                return Err(ModelError::EmptyConnection { index });
            }
            if let Some(&s) = seq.iter().find(|&&s| s as usize >= n) {
                return Err(ModelError::UnknownStation {
                    index,
                    token: format!("#{s}"),
                });
            }
            dedup_in_order(seq);
            for &s in seq.iter() {
                incidence[s as usize].push(index as u32);
            }
        }
        Ok(Self {
            stations,
            connections,
            incidence,
        })
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn connection_count(&self) -> usize {
        self.connections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    /// Station tokens in id order.
    pub fn stations(&self) -> &[String] {
        &self.stations
    }

    pub fn station_name(&self, id: StationId) -> &str {
        &self.stations[id as usize]
    }

    pub fn station_id(&self, token: &str) -> Option<StationId> {
        self.stations
            .binary_search_by(|n| n.as_str().cmp(token))
            .ok()
            .map(|i| i as StationId)
    }

    pub fn connections(&self) -> &[Vec<StationId>] {
        &self.connections
    }

    /// The connection as a station sequence.
    pub fn connection(&self, index: usize) -> &[StationId] {
        &self.connections[index]
    }

    /// The connection as a sorted station set.
    pub fn connection_set(&self, index: usize) -> Vec<StationId> {
        let mut set = self.connections[index].clone();
        set.sort_unstable();
        set
    }

    /// Indices of the connections containing `station`, ascending.
    pub fn incidence(&self, station: StationId) -> &[u32] {
        &self.incidence[station as usize]
    }

    pub fn degree(&self, station: StationId) -> usize {
        self.incidence[station as usize].len()
    }

    /// Number of (station, connection) incidence pairs.
    pub fn incidence_count(&self) -> usize {
        self.connections.iter().map(Vec::len).sum()
    }

    /// Sub-instance on the kept stations and connections. Kept connections
    /// lose their dropped stations but keep their order. Returns the
    /// sub-instance together with the original index of each kept connection
    /// and the original id of each kept station.
    ///
    /// Panics if a kept connection has no kept station.
    pub fn restrict(
        &self,
        keep_station: &[bool],
        keep_connection: &[bool],
    ) -> (Instance, Vec<usize>, Vec<StationId>) {
        let mut new_id = vec![u32::MAX; self.stations.len()];
        let mut names = Vec::new();
        let mut station_origin = Vec::new();
        for (i, name) in self.stations.iter().enumerate() {
            if keep_station[i] {
                new_id[i] = names.len() as u32;
                names.push(name.clone());
                station_origin.push(i as StationId);
            }
        }
        let mut conns = Vec::new();
        let mut origin = Vec::new();
        for (ci, seq) in self.connections.iter().enumerate() {
            if !keep_connection[ci] {
                continue;
            }
            let mapped: Vec<StationId> = seq
                .iter()
                .filter(|&&s| keep_station[s as usize])
                .map(|&s| new_id[s as usize])
                .collect();
            assert!(!mapped.is_empty(), "restriction empties connection {ci}");
            conns.push(mapped);
            origin.push(ci);
        }
        let inst = Instance::from_indexed(names, conns).expect("restriction of a valid instance");
        (inst, origin, station_origin)
    }

    /// Partition into connected components as (stations, connections) index
    /// lists, sorted by descending station count, ties by smallest station.
    pub fn component_partition(&self) -> Vec<(Vec<StationId>, Vec<usize>)> {
        let n = self.stations.len();
        let mut uf = UnionFind::new(n);
        for seq in &self.connections {
            for w in seq.windows(2) {
                uf.union(w[0] as usize, w[1] as usize);
            }
        }
        let mut slot = vec![usize::MAX; n];
        let mut parts: Vec<(Vec<StationId>, Vec<usize>)> = Vec::new();
        for s in 0..n {
            let root = uf.find(s);
            if slot[root] == usize::MAX {
                slot[root] = parts.len();
                parts.push((Vec::new(), Vec::new()));
            }
            parts[slot[root]].0.push(s as StationId);
        }
        for (ci, seq) in self.connections.iter().enumerate() {
            let root = uf.find(seq[0] as usize);
            parts[slot[root]].1.push(ci);
        }
        // Station lists are ascending, so element 0 is the smallest token.
        parts.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0[0].cmp(&b.0[0])));
        parts
    }

    /// Connected components as stand-alone instances (see
    /// [`Instance::component_partition`] for the order).
    pub fn connected_components(&self) -> Vec<Instance> {
        self.component_partition()
            .into_iter()
            .map(|(stations, conns)| self.sub_instance(&stations, &conns))
            .collect()
    }

    fn sub_instance(&self, stations: &[StationId], conns: &[usize]) -> Instance {
        let mut keep_s = vec![false; self.stations.len()];
        for &s in stations {
            keep_s[s as usize] = true;
        }
        let mut keep_c = vec![false; self.connections.len()];
        for &c in conns {
            keep_c[c] = true;
        }
        self.restrict(&keep_s, &keep_c).0
    }

    /// The component with the most stations.
    pub fn largest_component(&self) -> Result<Instance, ModelError> {
        let parts = self.component_partition();
        let (stations, conns) = parts.first().ok_or(ModelError::EmptyInstance)?;
        Ok(self.sub_instance(stations, conns))
    }

    pub fn degree_stats(&self) -> Result<DegreeStats, ModelError> {
        if self.stations.is_empty() {
            return Err(ModelError::EmptyInstance);
        }
        let station_degrees: Vec<usize> = self.incidence.iter().map(Vec::len).collect();
        let connection_degrees: Vec<usize> = self.connections.iter().map(Vec::len).collect();
        let pairs = self.incidence_count() as f64;
        let ns = self.stations.len() as f64;
        let nc = self.connections.len() as f64;
        Ok(DegreeStats {
            station_degrees,
            connection_degrees,
            delta_s: pairs / ns,
            delta_c: if nc > 0.0 { pairs / nc } else { 0.0 },
            ratio: ns / nc,
        })
    }
}

/// Degree counts and their means.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    /// Indexed by [`StationId`].
    pub station_degrees: Vec<usize>,
    /// Indexed by connection.
    pub connection_degrees: Vec<usize>,
    pub delta_s: f64,
    pub delta_c: f64,
    /// |S| / |C|; infinite for an instance without connections.
    pub ratio: f64,
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when both were already in the same set.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Parses the line-oriented instance format: one connection per line,
/// whitespace-separated station tokens, `#` starts a comment line.
pub fn read_hsd(text: &str) -> Result<Instance, ModelError> {
    let mut conns: Vec<Vec<&str>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if trimmed.is_empty() {
            return Err(ModelError::Malformed {
                line: i + 1,
                reason: "empty connection".into(),
            });
        }
        conns.push(trimmed.split_whitespace().collect());
    }
    Instance::from_connections(conns)
}

/// Writes the instance in the format read by [`read_hsd`]. Isolated stations
/// have no line of their own and are not written.
pub fn write_hsd(instance: &Instance) -> String {
    let mut out = String::new();
    for seq in instance.connections() {
        let mut first = true;
        for &s in seq {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{}", instance.station_name(s));
        }
        out.push('\n');
    }
    out
}
