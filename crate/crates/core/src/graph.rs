//! Bounded-degree simple graphs and elementary operations on them.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} has degree {degree}, above the bound")]
    DegreeExceeded { vertex: usize, degree: usize },
    #[error("vertex id {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("graphs are on different vertex sets ({0} vs {1} vertices)")]
    VertexSetMismatch(usize, usize),
    #[error("duplicate vertex {0} in subset")]
    DuplicateVertex(usize),
    #[error("malformed edge list: {0}")]
    Parse(String),
}

/// Simple undirected graph whose maximum degree is certified to be at most
/// `degree_bound`. Neighbor lists are kept sorted.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    degree_bound: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("d", &self.degree_bound)
            .field("edges", &self.edges())
            .finish()
    }
}

impl Graph {
    /// Validates a raw edge list on vertices `0..n` against the degree bound `d`.
    pub fn from_edges(
        n: usize,
        d: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Graph, GraphError> {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (u, row) in adjacency.iter_mut().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        // Report the lowest offending vertex so errors are deterministic.
        if let Some((vertex, row)) = adjacency.iter().enumerate().find(|(_, r)| r.len() > d) {
            return Err(GraphError::DegreeExceeded { vertex, degree: row.len() });
        }
        Ok(Graph { adjacency, degree_bound: d })
    }

    pub fn empty(n: usize, d: usize) -> Graph {
        Graph { adjacency: vec![Vec::new(); n], degree_bound: d }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Same edges, different certified bound. Fails if some degree exceeds it.
    pub fn with_degree_bound(&self, d: usize) -> Result<Graph, GraphError> {
        if let Some((vertex, row)) = self.adjacency.iter().enumerate().find(|(_, r)| r.len() > d) {
            return Err(GraphError::DegreeExceeded { vertex, degree: row.len() });
        }
        Ok(Graph { adjacency: self.adjacency.clone(), degree_bound: d })
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in ascending lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edge_iter().collect()
    }

    pub fn edge_iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Graph with the given edges removed. Edges not present are ignored.
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Graph {
        let mut adjacency = self.adjacency.clone();
        for &(u, v) in removed {
            if let Ok(i) = adjacency[u].binary_search(&v) {
                adjacency[u].remove(i);
            }
            if let Ok(i) = adjacency[v].binary_search(&u) {
                adjacency[v].remove(i);
            }
        }
        Graph { adjacency, degree_bound: self.degree_bound }
    }

    /// Applies a vertex relabeling: vertex `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n(), "permutation length");
        let edges = self.edge_iter().map(|(u, v)| (perm[u], perm[v]));
        Graph::from_edges(self.n(), self.degree_bound, edges).expect("permutation of a valid graph")
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n();
        let mut adjacency = self.adjacency.clone();
        adjacency.extend(other.adjacency.iter().map(|row| row.iter().map(|&v| v + shift).collect()));
        Graph { adjacency, degree_bound: self.degree_bound.max(other.degree_bound) }
    }

    /// BFS distances from `source`; `None` for unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Vertices within distance `r` of `source`, in BFS order (source first).
    pub fn ball_vertices(&self, source: usize, r: usize) -> Vec<usize> {
        ball_within(self, source, r, |_| true)
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.distances_from(0).iter().all(Option::is_some)
    }
}

/// BFS ball around `source` restricted to vertices accepted by `member`.
/// `source` itself is always included.
pub(crate) fn ball_within(g: &Graph, source: usize, r: usize, member: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut order = vec![source];
    let mut depth = vec![0usize];
    let mut seen = std::collections::HashSet::from([source]);
    let mut head = 0;
    while head < order.len() {
        let (u, du) = (order[head], depth[head]);
        head += 1;
        if du == r {
            continue;
        }
        for &w in g.neighbors(u) {
            if member(w) && seen.insert(w) {
                order.push(w);
                depth.push(du + 1);
            }
        }
    }
    order
}

/// Sorted, duplicate-free set of vertex ids over a host graph with `n` vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSubset {
    ids: Vec<usize>,
    host_n: usize,
}

impl VertexSubset {
    pub fn new(mut ids: Vec<usize>, host_n: usize) -> Result<VertexSubset, GraphError> {
        ids.sort_unstable();
        if let Some(&v) = ids.iter().find(|&&v| v >= host_n) {
            return Err(GraphError::VertexOutOfRange { vertex: v, n: host_n });
        }
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateVertex(w[0]));
        }
        Ok(VertexSubset { ids, host_n })
    }

    pub fn all(host_n: usize) -> VertexSubset {
        VertexSubset { ids: (0..host_n).collect(), host_n }
    }

    pub fn from_mask(mask: &[bool]) -> VertexSubset {
        let ids = mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
        VertexSubset { ids, host_n: mask.len() }
    }

    /// Subset of a host with at most 64 vertices given as a bit mask.
    pub fn from_bits(bits: u64, host_n: usize) -> VertexSubset {
        let ids = (0..host_n).filter(|&i| bits >> i & 1 == 1).collect();
        VertexSubset { ids, host_n }
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn host_n(&self) -> usize {
        self.host_n
    }

    pub fn contains(&self, v: usize) -> bool {
        self.ids.binary_search(&v).is_ok()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.host_n];
        for &v in &self.ids {
            mask[v] = true;
        }
        mask
    }

    pub fn complement(&self) -> VertexSubset {
        let mask = self.mask();
        VertexSubset::from_mask(&mask.iter().map(|m| !m).collect::<Vec<_>>())
    }

    fn check_host(&self, g: &Graph) {
        assert_eq!(self.host_n, g.n(), "vertex subset belongs to a different host graph");
    }
}

/// Induced subgraph together with the map from new ids back to host ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    pub graph: Graph,
    /// `index_map[new] = old`.
    pub index_map: Vec<usize>,
}

impl Subgraph {
    /// Set when the subset was empty; the graph then has no vertices.
    pub fn is_empty(&self) -> bool {
        self.index_map.is_empty()
    }
}

/// The spanned (induced) subgraph on `subset`, re-indexed in ascending host order.
pub fn spanned_subgraph(g: &Graph, subset: &VertexSubset) -> Subgraph {
    subset.check_host(g);
    let mut new_id = vec![usize::MAX; g.n()];
    for (i, &v) in subset.ids.iter().enumerate() {
        new_id[v] = i;
    }
    let adjacency = subset
        .ids
        .iter()
        .map(|&v| {
            g.neighbors(v).iter().filter(|&&w| new_id[w] != usize::MAX).map(|&w| new_id[w]).collect()
        })
        .collect();
    Subgraph { graph: Graph { adjacency, degree_bound: g.degree_bound }, index_map: subset.ids.clone() }
}

/// Number of edges with exactly one endpoint in `subset`.
pub fn boundary_edge_count(g: &Graph, subset: &VertexSubset) -> usize {
    subset.check_host(g);
    let mask = subset.mask();
    subset.ids.iter().map(|&v| g.neighbors(v).iter().filter(|&&w| !mask[w]).count()).sum()
}

/// Maximal connected vertex sets, ordered by their smallest vertex.
pub fn connected_components(g: &Graph) -> Vec<VertexSubset> {
    let mut comp = vec![usize::MAX; g.n()];
    let mut out = Vec::new();
    for s in 0..g.n() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        comp[s] = id;
        let mut stack = vec![s];
        let mut members = vec![s];
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    stack.push(w);
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(VertexSubset { ids: members, host_n: g.n() });
    }
    out
}

/// Joins distinct vertices at distance 1 or 2. The degree bound becomes `d^2`.
pub fn square_graph(g: &Graph) -> Graph {
    let adjacency = (0..g.n())
        .map(|u| {
            let mut row: Vec<usize> = g
                .neighbors(u)
                .iter()
                .flat_map(|&w| std::iter::once(w).chain(g.neighbors(w).iter().copied()))
                .filter(|&w| w != u)
                .collect();
            row.sort_unstable();
            row.dedup();
            row
        })
        .collect();
    Graph { adjacency, degree_bound: g.degree_bound * g.degree_bound }
}

/// `|E(G) Δ E(H)| / n` for two graphs on the same vertex set.
pub fn edit_distance<T: Scalar>(g: &Graph, h: &Graph) -> Result<T, GraphError> {
    if g.n() != h.n() {
        return Err(GraphError::VertexSetMismatch(g.n(), h.n()));
    }
    let diff = symmetric_difference(g, h).len();
    // An empty vertex set has no edges on either side.
    if g.n() == 0 {
        return Ok(T::zero());
    }
    Ok(T::from_ratio(diff as i64, g.n() as i64))
}

/// Edges present in exactly one of the two graphs, ascending.
pub fn symmetric_difference(g: &Graph, h: &Graph) -> Vec<(usize, usize)> {
    let (a, b) = (g.edges(), h.edges());
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                out.push(*x);
                i += 1;
            }
            (Some(_), Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (Some(x), None) => {
                out.push(*x);
                i += 1;
            }
            (None, Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Renders the `n d` header followed by ascending `u v` lines.
pub fn to_edge_list(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.degree_bound);
    for (u, v) in g.edge_iter() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Parses the edge-list text format. Edge order and orientation on input are free;
/// blank lines and lines starting with `#` are skipped.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| GraphError::Parse("missing header".into()))?;
    let (n, d) = parse_pair(header)?;
    let edges = lines.map(parse_pair).collect::<Result<Vec<_>, _>>()?;
    Graph::from_edges(n, d, edges)
}

fn parse_pair(line: &str) -> Result<(usize, usize), GraphError> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize, GraphError> {
        it.next()
            .ok_or_else(|| GraphError::Parse(format!("expected two integers in {line:?}")))?
            .parse()
            .map_err(|_| GraphError::Parse(format!("bad integer in {line:?}")))
    };
    let pair = (next()?, next()?);
    if it.next().is_some() {
        return Err(GraphError::Parse(format!("trailing fields in {line:?}")));
    }
    Ok(pair)
}
