//! Deterministic and seeded graph families with known local structure.

use std::ops::Range;

use rand::seq::{index::sample, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::Decorations;
use crate::graph::{Graph, GraphError};
use crate::scalar::Scalar;
use crate::stats::{d_s, stat_vector, Distance, StatVector, StatsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("infeasible family parameters: {0}")]
    InfeasibleSpec(String),
    #[error("configuration model repair did not converge after {0} swaps")]
    RetryExhausted(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A graph family member; serialized as JSON with a `kind` tag, for example
/// `{"kind":"grid_torus","rows":10,"cols":10}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Cycle { n: usize },
    Path { n: usize },
    GridTorus { rows: usize, cols: usize },
    RandomRegular { n: usize, d: usize, seed: u64 },
    /// Complete tree: every internal vertex has `arity` children.
    DAryTree { arity: usize, depth: usize },
    DisjointUnion { parts: Vec<FamilySpec> },
    /// Two graphs joined by `bridges` edges between distinct random endpoints.
    BridgedUnion { left: Box<FamilySpec>, right: Box<FamilySpec>, bridges: usize, seed: u64 },
}

impl FamilySpec {
    pub fn torus(side: usize) -> FamilySpec {
        FamilySpec::GridTorus { rows: side, cols: side }
    }

    pub fn bridged(left: FamilySpec, right: FamilySpec, bridges: usize, seed: u64) -> FamilySpec {
        FamilySpec::BridgedUnion { left: Box::new(left), right: Box::new(right), bridges, seed }
    }
}

/// Generated graph with the vertex ranges of its top-level blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub graph: Graph,
    pub blocks: Vec<Range<usize>>,
}

pub fn generate(spec: &FamilySpec) -> Result<Graph, GenError> {
    generate_with_blocks(spec).map(|g| g.graph)
}

pub fn generate_with_blocks(spec: &FamilySpec) -> Result<Generated, GenError> {
    let single = |graph: Graph| {
        let n = graph.n();
        Ok(Generated { graph, blocks: vec![0..n] })
    };
    match spec {
        FamilySpec::Cycle { n } => {
            if *n < 3 {
                return Err(GenError::InfeasibleSpec(format!("cycle needs n >= 3, got {n}")));
            }
            single(Graph::from_edges(*n, 2, (0..*n).map(|i| (i, (i + 1) % n)))?)
        }
        FamilySpec::Path { n } => {
            if *n == 0 {
                return Err(GenError::InfeasibleSpec("path needs n >= 1".into()));
            }
            single(Graph::from_edges(*n, 2, (1..*n).map(|i| (i - 1, i)))?)
        }
        FamilySpec::GridTorus { rows, cols } => single(torus(*rows, *cols)?),
        FamilySpec::RandomRegular { n, d, seed } => single(random_regular(*n, *d, *seed)?),
        FamilySpec::DAryTree { arity, depth } => single(d_ary_tree(*arity, *depth)?),
        FamilySpec::DisjointUnion { parts } => {
            let mut graph = Graph::empty(0, 0);
            let mut blocks = Vec::new();
            for part in parts {
                let g = generate(part)?;
                blocks.push(graph.n()..graph.n() + g.n());
                graph = graph.disjoint_union(&g);
            }
            Ok(Generated { graph, blocks })
        }
        FamilySpec::BridgedUnion { left, right, bridges, seed } => {
            let (a, b) = (generate(left)?, generate(right)?);
            Ok(Generated { graph: bridged_union(&a, &b, *bridges, *seed)?, blocks: vec![0..a.n(), a.n()..a.n() + b.n()] })
        }
    }
}

fn torus(rows: usize, cols: usize) -> Result<Graph, GenError> {
    if rows < 3 || cols < 3 {
        return Err(GenError::InfeasibleSpec(format!("torus sides must be >= 3, got {rows}x{cols}")));
    }
    let id = |i: usize, j: usize| (i % rows) * cols + (j % cols);
    let edges = (0..rows).flat_map(|i| (0..cols).flat_map(move |j| [(id(i, j), id(i, j + 1)), (id(i, j), id(i + 1, j))]));
    Ok(Graph::from_edges(rows * cols, 4, edges)?)
}

fn d_ary_tree(arity: usize, depth: usize) -> Result<Graph, GenError> {
    if arity == 0 {
        return Err(GenError::InfeasibleSpec("tree arity must be >= 1".into()));
    }
    let mut edges = Vec::new();
    let mut level = vec![0usize];
    let mut next = 1;
    for _ in 0..depth {
        let mut children = Vec::with_capacity(level.len() * arity);
        for &u in &level {
            for _ in 0..arity {
                edges.push((u, next));
                children.push(next);
                next += 1;
            }
        }
        level = children;
    }
    Ok(Graph::from_edges(next, arity + 1, edges)?)
}

const CONFIGURATION_ATTEMPTS: usize = 50;

/// Configuration model: shuffle `n·d` stubs and pair them, rejecting loops and
/// multi-edges. After a bounded number of rejected pairings the last one is
/// repaired by seeded double-edge swaps, at most `100·n` of them.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GenError> {
    if (n * d) % 2 != 0 {
        return Err(GenError::InfeasibleSpec(format!("n·d must be even, got n={n}, d={d}")));
    }
    if d >= n.max(1) && d > 0 {
        return Err(GenError::InfeasibleSpec(format!("degree {d} needs more than {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    let mut pairs = Vec::new();
    for _ in 0..CONFIGURATION_ATTEMPTS {
        stubs.shuffle(&mut rng);
        pairs = stubs.chunks(2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect::<Vec<_>>();
        if bad_edge(&pairs).is_none() {
            return Ok(Graph::from_edges(n, d, pairs)?);
        }
    }
    let cap = 100 * n;
    let mut swaps = 0;
    while let Some(i) = bad_edge(&pairs) {
        if swaps == cap {
            return Err(GenError::RetryExhausted(cap));
        }
        swaps += 1;
        let j = rng.gen_range(0..pairs.len());
        if j == i {
            continue;
        }
        let ((a, b), (c, e)) = (pairs[i], pairs[j]);
        let (x, y) = if rng.gen_bool(0.5) { ((a, c), (b, e)) } else { ((a, e), (b, c)) };
        let norm = |(p, q): (usize, usize)| (p.min(q), p.max(q));
        let (x, y) = (norm(x), norm(y));
        let fresh = |p: (usize, usize)| p.0 != p.1 && !pairs.contains(&p);
        if fresh(x) && fresh(y) && x != y {
            pairs[i] = x;
            pairs[j] = y;
        }
    }
    Ok(Graph::from_edges(n, d, pairs)?)
}

/// Index of the first loop or repeated edge.
fn bad_edge(pairs: &[(usize, usize)]) -> Option<usize> {
    let mut seen = std::collections::HashSet::with_capacity(pairs.len());
    pairs.iter().position(|&p| p.0 == p.1 || !seen.insert(p))
}

/// Disjoint union of `a` and `b` plus `bridges` edges joining distinct random
/// vertices of `a` to distinct random vertices of `b`.
pub fn bridged_union(a: &Graph, b: &Graph, bridges: usize, seed: u64) -> Result<Graph, GenError> {
    if bridges > a.n().min(b.n()) {
        return Err(GenError::InfeasibleSpec(format!(
            "{bridges} bridges need that many distinct endpoints on each side"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let left = sample(&mut rng, a.n(), bridges).into_vec();
    let right = sample(&mut rng, b.n(), bridges).into_vec();
    let union = a.disjoint_union(b);
    let d = union.degree_bound() + usize::from(bridges > 0);
    let edges = union.edges().into_iter().chain(left.into_iter().zip(right).map(|(u, v)| (u, a.n() + v)));
    Ok(Graph::from_edges(union.n(), d, edges)?)
}

/// Statistics and pairwise distances along a sequence of graphs.
#[derive(Debug, Clone)]
pub struct ConvergenceReport<T> {
    pub sizes: Vec<usize>,
    pub stats: Vec<StatVector<T>>,
    /// `table[i][j] = d_s(G_i, G_j)`.
    pub table: Vec<Vec<Distance<T>>>,
    /// `d_s(G_i, G_{i+1})`.
    pub consecutive: Vec<T>,
    pub monotone_decreasing: bool,
}

pub fn sequence<T: Scalar>(specs: &[FamilySpec], max_radius: usize) -> Result<ConvergenceReport<T>, SequenceError> {
    if specs.len() < 2 {
        return Err(SequenceError::TooShort);
    }
    let graphs = specs.iter().map(generate).collect::<Result<Vec<_>, _>>()?;
    Ok(convergence_report(&graphs, max_radius)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("a sequence needs at least two graphs")]
    TooShort,
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

pub fn convergence_report<T: Scalar>(graphs: &[Graph], max_radius: usize) -> Result<ConvergenceReport<T>, StatsError> {
    let stats = graphs
        .iter()
        .map(|g| stat_vector(g, max_radius, Decorations::plain()))
        .collect::<Result<Vec<StatVector<T>>, _>>()?;
    let mut table = Vec::with_capacity(stats.len());
    for a in &stats {
        table.push(stats.iter().map(|b| d_s(a, b)).collect::<Result<Vec<_>, _>>()?);
    }
    let consecutive: Vec<T> = (1..stats.len()).map(|i| table[i - 1][i].value.clone()).collect();
    let monotone_decreasing = consecutive.windows(2).all(|w| w[1] <= w[0]);
    Ok(ConvergenceReport { sizes: graphs.iter().map(Graph::n).collect(), stats, table, consecutive, monotone_decreasing })
}
