//! The station graph G_N (stations as vertices, consecutive stations of a
//! connection as edges), its 2-core, and instance constructions over a
//! given graph: one whose core is trivial, one whose core is the 2-core,
//! and a 3-SAT encoding with small treewidth and feedback vertex number.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::model::{Instance, ModelError, StationId, UnionFind};
use crate::reduce::{reduce_to_core, ReductionReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("component containing `{0}` has an empty 2-core")]
    EmptyTwoCore(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("DIMACS line {line}: {reason}")]
    Dimacs { line: usize, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Undirected simple graph over named vertices. Vertex ids follow name order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    adjacency: Vec<BTreeSet<u32>>,
}

impl Graph {
    /// Builds a graph from sorted unique names and edges over their ids.
    /// Loops are ignored and parallel edges merged.
    pub fn new(names: Vec<String>, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut adjacency = vec![BTreeSet::new(); names.len()];
        for (u, v) in edges {
            if u != v {
                adjacency[u as usize].insert(v);
                adjacency[v as usize].insert(u);
            }
        }
        Self { names, adjacency }
    }

    /// Builds a graph from named edges; the vertex set is the set of endpoints.
    pub fn from_named_edges<S: AsRef<str>>(edges: &[(S, S)]) -> Self {
        let names: Vec<String> = edges
            .iter()
            .flat_map(|(u, v)| [u.as_ref().to_string(), v.as_ref().to_string()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let id = |s: &str| names.binary_search_by(|n| n.as_str().cmp(s)).unwrap() as u32;
        let ids: Vec<(u32, u32)> = edges
            .iter()
            .map(|(u, v)| (id(u.as_ref()), id(v.as_ref())))
            .collect();
        Self::new(names, ids)
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: u32) -> &str {
        &self.names[v as usize]
    }

    pub fn vertex(&self, name: &str) -> Option<u32> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(|i| i as u32)
    }

    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.adjacency[v as usize].iter().copied()
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adjacency[u as usize].contains(&v)
    }

    /// Edges as (smaller id, larger id), sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (u, adj) in self.adjacency.iter().enumerate() {
            for &v in adj.range(u as u32 + 1..) {
                out.push((u as u32, v));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Edges as sorted name pairs, for comparing graphs over different id maps.
    pub fn named_edges(&self) -> BTreeSet<(String, String)> {
        self.edges()
            .into_iter()
            .map(|(u, v)| {
                let (a, b) = (self.name(u).to_string(), self.name(v).to_string());
                if a < b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect()
    }

    /// Vertex sets of the connected components, each ascending.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let n = self.names.len();
        let mut uf = UnionFind::new(n);
        for (u, v) in self.edges() {
            uf.union(u as usize, v as usize);
        }
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<u32>> = Vec::new();
        for v in 0..n {
            let r = uf.find(v);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(v as u32);
        }
        out
    }

    /// True if deleting the `removed` vertices leaves a forest.
    pub fn is_acyclic_without(&self, removed: &[u32]) -> bool {
        let mut uf = UnionFind::new(self.names.len());
        self.edges()
            .into_iter()
            .filter(|(u, v)| !removed.contains(u) && !removed.contains(v))
            .all(|(u, v)| uf.union(u as usize, v as usize))
    }

    /// Breadth-first distances and parents from `source`.
    fn bfs(&self, source: u32) -> (Vec<usize>, Vec<u32>) {
        let n = self.names.len();
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![u32::MAX; n];
        let mut queue = VecDeque::from([source]);
        dist[source as usize] = 0;
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if dist[v as usize] == usize::MAX {
                    dist[v as usize] = dist[u as usize] + 1;
                    parent[v as usize] = u;
                    queue.push_back(v);
                }
            }
        }
        (dist, parent)
    }
}

/// G_N: one vertex per station, an edge for each pair of consecutive
/// stations in a connection. Vertex ids equal station ids.
pub fn to_graph(instance: &Instance) -> Graph {
    let edges = instance
        .connections()
        .iter()
        .flat_map(|seq| seq.windows(2).map(|w| (w[0], w[1])));
    Graph::new(instance.stations().to_vec(), edges)
}

/// Membership mask of the 2-core: repeatedly delete vertices of degree < 2.
pub fn two_core_mask(graph: &Graph) -> Vec<bool> {
    let n = graph.vertex_count();
    let mut degree: Vec<usize> = (0..n as u32).map(|v| graph.degree(v)).collect();
    let mut alive = vec![true; n];
    let mut stack: Vec<u32> = (0..n as u32).filter(|&v| degree[v as usize] < 2).collect();
    while let Some(v) = stack.pop() {
        if !alive[v as usize] {
            continue;
        }
        alive[v as usize] = false;
        for u in graph.neighbors(v) {
            if alive[u as usize] {
                degree[u as usize] -= 1;
                if degree[u as usize] == 1 {
                    stack.push(u);
                }
            }
        }
    }
    alive
}

/// The 2-core as a graph on its own vertex set (empty for forests).
pub fn two_core(graph: &Graph) -> Graph {
    let mask = two_core_mask(graph);
    let mut new_id = vec![u32::MAX; graph.vertex_count()];
    let mut names = Vec::new();
    for (v, &keep) in mask.iter().enumerate() {
        if keep {
            new_id[v] = names.len() as u32;
            names.push(graph.names[v].clone());
        }
    }
    let edges: Vec<(u32, u32)> = graph
        .edges()
        .into_iter()
        .filter(|&(u, v)| mask[u as usize] && mask[v as usize])
        .map(|(u, v)| (new_id[u as usize], new_id[v as usize]))
        .collect();
    Graph::new(names, edges)
}

/// Fraction of the instance's stations in the 2-core of G_N.
pub fn relative_two_core_size(instance: &Instance) -> f64 {
    if instance.station_count() == 0 {
        return 0.0;
    }
    let mask = two_core_mask(&to_graph(instance));
    mask.iter().filter(|&&b| b).count() as f64 / instance.station_count() as f64
}

/// Edges of the reduced instance's station graph. A core connection keeps
/// the pairs of its source connection that were consecutive in the input
/// and both survived. Ids are input station ids.
fn surviving_edges(instance: &Instance, report: &ReductionReport) -> BTreeSet<(u32, u32)> {
    let mut alive = vec![false; instance.station_count()];
    for &s in &report.core_station_origin {
        alive[s as usize] = true;
    }
    let mut edges = BTreeSet::new();
    for &origin in &report.core_connection_origin {
        for w in instance.connection(origin).windows(2) {
            if alive[w[0] as usize] && alive[w[1] as usize] {
                edges.insert((w[0].min(w[1]), w[0].max(w[1])));
            }
        }
    }
    edges
}

/// Violations of the 2-core bound on a reduced instance, as messages. Checks
/// that every station of the core that shares a core connection with another
/// station is a 2-core vertex of G_N, and that every surviving station-graph
/// edge is an edge of that 2-core.
pub fn proposition1_violations(instance: &Instance) -> Vec<String> {
    let report = reduce_to_core(instance);
    let graph = to_graph(instance);
    let mask = two_core_mask(&graph);
    let mut out = Vec::new();
    for seq in report.core.connections() {
        if seq.len() < 2 {
            continue;
        }
        for &s in seq {
            let orig = report.core_station_origin[s as usize];
            if !mask[orig as usize] {
                out.push(format!(
                    "core station `{}` is not in the 2-core",
                    instance.station_name(orig)
                ));
            }
        }
    }
    for (u, v) in surviving_edges(instance, &report) {
        if !(mask[u as usize] && mask[v as usize] && graph.has_edge(u, v)) {
            out.push(format!(
                "core edge {}-{} is not a 2-core edge",
                instance.station_name(u),
                instance.station_name(v)
            ));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// True when the reduced instance's station graph sits inside the 2-core of
/// the input's station graph (plus isolated vertices).
pub fn check_proposition1(instance: &Instance) -> bool {
    proposition1_violations(instance).is_empty()
}

/// An instance over `graph` in which one station per component lies on
/// every connection, so the core has complexity 1.
///
/// For each edge, the connection is a shortest path from the designated
/// station to the nearer endpoint followed by the other endpoint. The
/// designated station of a component defaults to its smallest vertex;
/// `designated` overrides it for the component that contains it.
pub fn build_n1(graph: &Graph, designated: Option<&str>) -> Result<Instance, GraphError> {
    let forced = match designated {
        Some(name) => Some(
            graph
                .vertex(name)
                .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))?,
        ),
        None => None,
    };
    let mut connections: Vec<Vec<StationId>> = Vec::new();
    for comp in graph.components() {
        let source = match forced {
            Some(f) if comp.contains(&f) => f,
            _ => comp[0],
        };
        let (dist, parent) = graph.bfs(source);
        let path_to = |v: u32| {
            let mut path = vec![v];
            let mut cur = v;
            while cur != source {
                cur = parent[cur as usize];
                path.push(cur);
            }
            path.reverse();
            path
        };
        for &u in &comp {
            for v in graph.neighbors(u).filter(|&v| v > u) {
                let (near, far) = if dist[v as usize] < dist[u as usize] {
                    (v, u)
                } else {
                    (u, v)
                };
                let mut path = path_to(near);
                path.push(far);
                connections.push(path);
            }
        }
    }
    Ok(Instance::from_indexed(graph.names.clone(), connections)?)
}

/// An instance over `graph` whose core is the 2-core with one connection
/// per 2-core edge.
///
/// Each 2-core edge becomes a two-station connection. Each vertex outside
/// the 2-core gets the connection formed by its tree path to the 2-core
/// anchor, extended by the anchor's edge to its smallest 2-core neighbor.
/// Every component needs a cycle.
pub fn build_n2(graph: &Graph) -> Result<Instance, GraphError> {
    let core = two_core_mask(graph);
    for comp in graph.components() {
        if !comp.iter().any(|&v| core[v as usize]) {
            return Err(GraphError::EmptyTwoCore(graph.name(comp[0]).to_string()));
        }
    }
    let n = graph.vertex_count();
    // Multi-source BFS from the 2-core gives each outside vertex its parent
    // toward the anchor.
    let mut parent = vec![u32::MAX; n];
    let mut seen = core.clone();
    let mut queue: VecDeque<u32> = (0..n as u32).filter(|&v| core[v as usize]).collect();
    while let Some(u) = queue.pop_front() {
        for v in graph.neighbors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                parent[v as usize] = u;
                queue.push_back(v);
            }
        }
    }
    let mut connections: Vec<Vec<StationId>> = graph
        .edges()
        .into_iter()
        .filter(|&(u, v)| core[u as usize] && core[v as usize])
        .map(|(u, v)| vec![u, v])
        .collect();
    for s in (0..n as u32).filter(|&v| !core[v as usize]) {
        let mut path = vec![s];
        let mut cur = s;
        while !core[cur as usize] {
            cur = parent[cur as usize];
            path.push(cur);
        }
        let anchor_neighbor = graph
            .neighbors(cur)
            .find(|&v| core[v as usize])
            .expect("2-core vertices have 2-core neighbors");
        path.push(anchor_neighbor);
        connections.push(path);
    }
    Ok(Instance::from_indexed(graph.names.clone(), connections)?)
}

/// A 3-CNF formula; literal `k` is variable `k`, `-k` its negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula3Sat {
    pub num_vars: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl Formula3Sat {
    pub fn new(num_vars: usize, clauses: Vec<[i32; 3]>) -> Self {
        for clause in &clauses {
            for &lit in clause {
                assert!(
                    lit != 0 && lit.unsigned_abs() as usize <= num_vars,
                    "literal {lit} out of range"
                );
            }
        }
        Self { num_vars, clauses }
    }

    /// Parses DIMACS CNF. Every clause must have exactly three literals.
    pub fn from_dimacs(text: &str) -> Result<Self, GraphError> {
        let err = |line: usize, reason: &str| GraphError::Dimacs {
            line,
            reason: reason.to_string(),
        };
        let mut num_vars = None;
        let mut clauses = Vec::new();
        let mut pending: Vec<i32> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
                continue;
            }
            if t.starts_with('p') {
                let parts: Vec<&str> = t.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(err(line_no, "expected `p cnf <vars> <clauses>`"));
                }
                num_vars = Some(
                    parts[2]
                        .parse::<usize>()
                        .map_err(|_| err(line_no, "bad variable count"))?,
                );
                continue;
            }
            let n = num_vars.ok_or_else(|| err(line_no, "clause before problem line"))?;
            for tok in t.split_whitespace() {
                let lit: i32 = tok.parse().map_err(|_| err(line_no, "bad literal"))?;
                if lit == 0 {
                    if pending.len() != 3 {
                        return Err(err(line_no, "clause must have exactly 3 literals"));
                    }
                    clauses.push([pending[0], pending[1], pending[2]]);
                    pending.clear();
                } else {
                    if lit.unsigned_abs() as usize > n {
                        return Err(err(line_no, "literal out of range"));
                    }
                    pending.push(lit);
                }
            }
        }
        if !pending.is_empty() {
            return Err(err(text.lines().count(), "unterminated clause"));
        }
        let num_vars = num_vars.ok_or_else(|| err(0, "missing problem line"))?;
        Ok(Self { num_vars, clauses })
    }

    /// Truth-table satisfiability; fine for small variable counts.
    pub fn is_satisfiable_brute_force(&self) -> bool {
        assert!(self.num_vars < 32);
        (0u32..1 << self.num_vars).any(|assignment| {
            self.clauses.iter().all(|clause| {
                clause.iter().any(|&lit| {
                    let value = assignment >> (lit.unsigned_abs() - 1) & 1 == 1;
                    value == (lit > 0)
                })
            })
        })
    }
}

/// Station name of a literal's vertex.
pub fn literal_name(lit: i32) -> String {
    if lit > 0 {
        format!("x{lit}")
    } else {
        format!("!x{}", -lit)
    }
}

pub const Z0: &str = "z0";
pub const Z1: &str = "z1";

/// Encodes a formula as a station cover instance: a connection
/// `(x_i, !x_i)` per variable and `(l_a, z0, l_b, z1, l_c)` per clause. The
/// formula is satisfiable iff the minimum cover has exactly `num_vars`
/// stations.
pub fn encode_3sat(formula: &Formula3Sat) -> Result<(Instance, Graph), GraphError> {
    let mut stations: Vec<String> = (1..=formula.num_vars as i32)
        .flat_map(|v| [literal_name(v), literal_name(-v)])
        .collect();
    stations.push(Z0.into());
    stations.push(Z1.into());
    let mut connections: Vec<Vec<String>> = (1..=formula.num_vars as i32)
        .map(|v| vec![literal_name(v), literal_name(-v)])
        .collect();
    for &[a, b, c] in &formula.clauses {
        connections.push(vec![
            literal_name(a),
            Z0.into(),
            literal_name(b),
            Z1.into(),
            literal_name(c),
        ]);
    }
    let instance = Instance::new(&stations, &connections)?;
    let graph = to_graph(&instance);
    Ok((instance, graph))
}

/// A tree decomposition: bags of vertex ids and the tree edges between bags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<u32>>,
    pub tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn width(&self) -> Option<usize> {
        self.bags.iter().map(|b| b.len()).max().map(|m| m.saturating_sub(1))
    }

    /// Checks that the bag tree is a tree, every vertex and every edge is in
    /// some bag, and the bags holding any vertex form a connected subtree.
    pub fn is_valid_for(&self, graph: &Graph) -> bool {
        let k = self.bags.len();
        if k == 0 {
            return graph.vertex_count() == 0;
        }
        if self.tree_edges.len() != k - 1 {
            return false;
        }
        let mut uf = UnionFind::new(k);
        for &(a, b) in &self.tree_edges {
            if a >= k || b >= k || !uf.union(a, b) {
                return false;
            }
        }
        let n = graph.vertex_count();
        let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if v as usize >= n {
                    return false;
                }
                holders[v as usize].push(i);
            }
        }
        if holders.iter().any(Vec::is_empty) {
            return false;
        }
        let covered = |u: u32, v: u32| self.bags.iter().any(|b| b.contains(&u) && b.contains(&v));
        if !graph.edges().into_iter().all(|(u, v)| covered(u, v)) {
            return false;
        }
        // Bags holding v are connected iff the tree edges among them number
        // one less than the bags.
        holders.iter().enumerate().all(|(v, bags)| {
            let inner = self
                .tree_edges
                .iter()
                .filter(|&&(a, b)| self.bags[a].contains(&(v as u32)) && self.bags[b].contains(&(v as u32)))
                .count();
            inner + 1 == bags.len()
        })
    }
}

/// The path decomposition with one bag `{x_i, !x_i, z0, z1}` per variable,
/// for a graph produced by [`encode_3sat`].
pub fn encoding_decomposition(graph: &Graph, num_vars: usize) -> Option<TreeDecomposition> {
    let z0 = graph.vertex(Z0)?;
    let z1 = graph.vertex(Z1)?;
    let mut bags = Vec::new();
    for v in 1..=num_vars as i32 {
        let pos = graph.vertex(&literal_name(v))?;
        let neg = graph.vertex(&literal_name(-v))?;
        bags.push(vec![pos, neg, z0, z1]);
    }
    let tree_edges = (1..bags.len()).map(|i| (i - 1, i)).collect();
    Some(TreeDecomposition { bags, tree_edges })
}

/// Checks the structural witnesses of an encoding graph: removing `z0` and
/// `z1` leaves a forest, and the per-variable bag path is a tree
/// decomposition of width at most 3.
pub fn verify_structure_witnesses(graph: &Graph) -> bool {
    let (Some(z0), Some(z1)) = (graph.vertex(Z0), graph.vertex(Z1)) else {
        return false;
    };
    if !graph.is_acyclic_without(&[z0, z1]) {
        return false;
    }
    let num_vars = (graph.vertex_count() - 2) / 2;
    if graph.vertex_count() != 2 * num_vars + 2 || num_vars == 0 {
        return false;
    }
    match encoding_decomposition(graph, num_vars) {
        Some(td) => td.width() == Some(3) && td.is_valid_for(graph),
        None => false,
    }
}
