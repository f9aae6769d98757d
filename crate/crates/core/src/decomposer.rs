//! Partitioning a graph into parts with homogeneous local statistics.
//!
//! [`decompose`] groups vertices by radius-`M` ball code, merges code classes
//! with similar neighborhood profiles down to `K_max` clusters, smooths the
//! cluster boundaries by majority moves, deletes the cross edges and folds
//! tiny parts into the empty part. It is a heuristic; [`verify_partition`]
//! judges the result.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::{vertex_codes, BallCode, Decorations};
use crate::graph::{Graph, VertexSubset};
use crate::quasihom::{check_exact, falsify_heuristic, QuasihomError, QuasihomParams, QuasihomVerdict, VerdictStatus};
use crate::scalar::Scalar;
use crate::stats::{d_s, mixture, stat_vector, Distance, StatVector, StatsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("inconsistent partition: {0}")]
    InconsistentPartition(String),
    #[error("partitions in a sequence must share K, found {0} and {1}")]
    KMismatch(u32, u32),
    #[error("empty sequence")]
    EmptySequence,
    #[error(transparent)]
    Quasihom(#[from] QuasihomError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Assignment of every vertex to a part `1..=k` or to the empty part
/// (`None`), plus the deleted edges: exactly the host edges that join two
/// different parts or touch the empty part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub n: usize,
    pub k: u32,
    pub parts: Vec<Option<u32>>,
    pub deleted_edges: Vec<(usize, usize)>,
}

impl Partition {
    /// Builds the partition for `parts`, deriving the deleted edges.
    pub fn from_assignment(g: &Graph, k: u32, parts: Vec<Option<u32>>) -> Result<Partition, PartitionError> {
        if parts.len() != g.n() {
            return Err(PartitionError::InconsistentPartition(format!(
                "{} assignments for {} vertices",
                parts.len(),
                g.n()
            )));
        }
        if let Some(v) = parts.iter().position(|p| matches!(p, Some(i) if *i == 0 || *i > k)) {
            return Err(PartitionError::InconsistentPartition(format!("vertex {v} has a part id outside 1..={k}")));
        }
        let deleted_edges = g.edge_iter().filter(|&(u, v)| parts[u].is_none() || parts[u] != parts[v]).collect();
        Ok(Partition { n: g.n(), k, parts, deleted_edges })
    }

    /// The single-part partition with no deletions.
    pub fn trivial(g: &Graph) -> Partition {
        Partition { n: g.n(), k: 1, parts: vec![Some(1); g.n()], deleted_edges: Vec::new() }
    }

    /// Checks the assignment against `g` and that the deleted edges are
    /// exactly the ones the assignment implies.
    pub fn validate(&self, g: &Graph) -> Result<(), PartitionError> {
        if self.n != g.n() {
            return Err(PartitionError::InconsistentPartition(format!("partition is over {} vertices, graph has {}", self.n, g.n())));
        }
        let expected = Partition::from_assignment(g, self.k, self.parts.clone())?;
        let mut claimed = self.deleted_edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect::<Vec<_>>();
        claimed.sort_unstable();
        if let Some(&(u, v)) = claimed.iter().find(|&&(u, v)| v >= g.n() || !g.has_edge(u, v)) {
            return Err(PartitionError::InconsistentPartition(format!("deleted edge ({u}, {v}) is not a host edge")));
        }
        if claimed != expected.deleted_edges {
            return Err(PartitionError::InconsistentPartition(
                "deleted edges differ from the edges joining different parts or touching the empty part".into(),
            ));
        }
        Ok(())
    }

    /// Vertices of part `i`; `None` is the empty part.
    pub fn members(&self, i: Option<u32>) -> VertexSubset {
        VertexSubset::from_mask(&self.parts.iter().map(|&p| p == i).collect::<Vec<_>>())
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k as usize + 1];
        for p in &self.parts {
            sizes[p.map_or(0, |i| i as usize)] += 1;
        }
        sizes
    }

    /// Host graph with the deleted edges removed.
    pub fn residual(&self, g: &Graph) -> Graph {
        g.without_edges(&self.deleted_edges)
    }

    /// Renumbers nonempty parts as `1..=k'` in order of their smallest vertex.
    fn compacted(g: &Graph, parts: &[Option<u32>]) -> Partition {
        let mut relabel: HashMap<u32, u32> = HashMap::new();
        let parts: Vec<Option<u32>> = parts
            .iter()
            .map(|p| {
                p.map(|i| {
                    let next = relabel.len() as u32 + 1;
                    *relabel.entry(i).or_insert(next)
                })
            })
            .collect();
        Partition::from_assignment(g, relabel.len() as u32, parts).expect("compacted labels are in range")
    }
}

/// Which part-size threshold the verifier applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// `δ² / (10 d K)`.
    #[default]
    Statement,
    /// `δ / (10 d K)`.
    Proof,
}

pub fn size_threshold<T: Scalar>(delta: &T, d: usize, k: u32, mode: ThresholdMode) -> T {
    let den = T::from_int(10 * d.max(1) as i64 * k.max(1) as i64);
    match mode {
        ThresholdMode::Statement => delta.clone() * delta.clone() / den,
        ThresholdMode::Proof => delta.clone() / den,
    }
}

/// Moves every part with `|V_i| / n ≤ threshold` into the empty part and
/// deletes the edges it had, then renumbers the remaining parts. Idempotent.
pub fn absorb_small_parts<T: Scalar>(
    g: &Graph,
    p: &Partition,
    delta: &T,
    k: u32,
    mode: ThresholdMode,
) -> Result<Partition, PartitionError> {
    p.validate(g)?;
    let threshold = size_threshold(delta, g.degree_bound(), k, mode);
    let sizes = p.part_sizes();
    let n = T::from_int(g.n().max(1) as i64);
    let small: Vec<bool> = sizes.iter().map(|&s| T::from_int(s as i64) / n.clone() <= threshold).collect();
    let parts: Vec<Option<u32>> = p.parts.iter().map(|&x| x.filter(|&i| !small[i as usize])).collect();
    Ok(Partition::compacted(g, &parts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeParams<T> {
    pub delta: T,
    pub lambda: T,
    pub k_max: u32,
    pub signature_radius: usize,
    /// Recorded for reproducibility; the current procedure is deterministic.
    pub seed: u64,
    pub threshold_mode: ThresholdMode,
}

/// Code classes beyond this many are attached to their nearest large class
/// before agglomeration, which keeps the pairwise step cubic in a constant.
pub const MAX_AGGLOMERATION_CLASSES: usize = 256;

/// See the module documentation. Never fails on a valid graph.
pub fn decompose<T: Scalar>(g: &Graph, params: &DecomposeParams<T>) -> Result<Partition, PartitionError> {
    let n = g.n();
    if n == 0 {
        return Ok(Partition { n: 0, k: 0, parts: Vec::new(), deleted_edges: Vec::new() });
    }
    let m = params.signature_radius.max(1);
    let k_max = params.k_max.max(1) as usize;

    // (1) signature classes, numbered by first occurrence.
    let codes = vertex_codes(g, m, Decorations::plain());
    let mut class_of_code: HashMap<&BallCode, usize> = HashMap::new();
    let class: Vec<usize> = codes
        .iter()
        .map(|c| {
            let next = class_of_code.len();
            *class_of_code.entry(c).or_insert(next)
        })
        .collect();
    let classes = class_of_code.len();

    // (2) profile of a class: code classes seen over its members' closed
    // neighborhoods, as integer counts.
    let mut profiles: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); classes];
    for v in 0..n {
        let row = &mut profiles[class[v]];
        *row.entry(class[v]).or_insert(0) += 1;
        for &w in g.neighbors(v) {
            *row.entry(class[w]).or_insert(0) += 1;
        }
    }
    let (cluster_of_class, pooled) = agglomerate(profiles, k_max);

    // (3) assignment: each vertex joins the cluster whose pooled profile is
    // closest to its own closed-neighborhood histogram, keeping its class's
    // cluster on ties. Vertices whose code matches another region's (bridge
    // endpoints, say) are pulled back toward their surroundings.
    let mut label: Vec<u32> = (0..n)
        .map(|v| {
            let own = cluster_of_class[class[v]];
            let mut hist = BTreeMap::new();
            for w in std::iter::once(v).chain(g.neighbors(v).iter().copied()) {
                *hist.entry(class[w]).or_insert(0u64) += 1;
            }
            let mut best = (tv(&hist, &pooled[own]), own);
            for (c, prof) in pooled.iter().enumerate() {
                let d = tv(&hist, prof);
                if d < best.0 {
                    best = (d, c);
                }
            }
            best.1 as u32 + 1
        })
        .collect();
    // (4) smoothing.
    smooth(g, &mut label, 10 * n);

    // (5) cross edges, (6) small parts.
    let p = Partition::compacted(g, &label.iter().map(|&l| Some(l)).collect::<Vec<_>>());
    absorb_small_parts(g, &p, &params.delta, params.k_max.max(1), params.threshold_mode)
}

fn tv(a: &BTreeMap<usize, u64>, b: &BTreeMap<usize, u64>) -> f64 {
    let (ta, tb) = (a.values().sum::<u64>() as f64, b.values().sum::<u64>() as f64);
    let mut sum = 0.0;
    for (k, &x) in a {
        sum += (x as f64 / ta - b.get(k).map_or(0.0, |&y| y as f64 / tb)).abs();
    }
    for (k, &y) in b {
        if !a.contains_key(k) {
            sum += y as f64 / tb;
        }
    }
    sum / 2.0
}

fn merge_into(target: &mut BTreeMap<usize, u64>, src: &BTreeMap<usize, u64>) {
    for (&k, &x) in src {
        *target.entry(k).or_insert(0) += x;
    }
}

/// Cluster index per class, and each cluster's pooled profile. Repeatedly
/// merges the two clusters whose pooled profiles are closest in total
/// variation (ties: lowest index pair). Cluster indices are dense.
fn agglomerate(profiles: Vec<BTreeMap<usize, u64>>, k_max: usize) -> (Vec<usize>, Vec<BTreeMap<usize, u64>>) {
    let classes = profiles.len();
    let weight = |p: &BTreeMap<usize, u64>| p.values().sum::<u64>();
    // Largest classes seed the clusters; the rest join their nearest seed.
    let mut order: Vec<usize> = (0..classes).collect();
    order.sort_by(|&a, &b| weight(&profiles[b]).cmp(&weight(&profiles[a])).then(a.cmp(&b)));
    let seeds: Vec<usize> = order.iter().copied().take(MAX_AGGLOMERATION_CLASSES).collect();
    let mut cluster_of = vec![usize::MAX; classes];
    let mut pooled: Vec<Option<BTreeMap<usize, u64>>> = seeds.iter().map(|&c| Some(profiles[c].clone())).collect();
    for (i, &c) in seeds.iter().enumerate() {
        cluster_of[c] = i;
    }
    for &c in order.iter().skip(seeds.len()) {
        let nearest = (0..seeds.len())
            .min_by(|&a, &b| tv(&profiles[c], &profiles[seeds[a]]).total_cmp(&tv(&profiles[c], &profiles[seeds[b]])))
            .expect("at least one seed");
        cluster_of[c] = nearest;
        merge_into(pooled[nearest].as_mut().unwrap(), &profiles[c]);
    }

    let k = seeds.len();
    let mut dist = vec![vec![f64::INFINITY; k]; k];
    for a in 0..k {
        for b in a + 1..k {
            dist[a][b] = tv(pooled[a].as_ref().unwrap(), pooled[b].as_ref().unwrap());
        }
    }
    let mut alive = k;
    let mut parent: Vec<usize> = (0..k).collect();
    while alive > k_max {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..k {
            if pooled[a].is_none() {
                continue;
            }
            for b in a + 1..k {
                if pooled[b].is_some() && dist[a][b] < best.0 {
                    best = (dist[a][b], a, b);
                }
            }
        }
        let (_, a, b) = best;
        let pb = pooled[b].take().unwrap();
        merge_into(pooled[a].as_mut().unwrap(), &pb);
        parent[b] = a;
        alive -= 1;
        for c in 0..k {
            if c != a && pooled[c].is_some() {
                let d = tv(pooled[a].as_ref().unwrap(), pooled[c].as_ref().unwrap());
                if c < a {
                    dist[c][a] = d;
                } else {
                    dist[a][c] = d;
                }
            }
        }
    }
    let root = |mut c: usize| {
        while parent[c] != c {
            c = parent[c];
        }
        c
    };
    let roots: Vec<usize> = (0..k).filter(|&c| pooled[c].is_some()).collect();
    let dense: HashMap<usize, usize> = roots.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let pooled = roots.iter().map(|&r| pooled[r].take().unwrap()).collect();
    (cluster_of.iter().map(|&c| dense[&root(c)]).collect(), pooled)
}

/// Sweeps vertices in ascending id, moving a vertex to the part holding a
/// strict majority of its neighbors when that part is not its own. Every
/// move shrinks the cut, so this terminates; it is also capped at `cap` moves.
fn smooth(g: &Graph, label: &mut [u32], cap: usize) {
    let mut moves = 0;
    loop {
        let mut changed = false;
        for v in 0..g.n() {
            if moves >= cap {
                return;
            }
            let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
            for &w in g.neighbors(v) {
                *counts.entry(label[w]).or_insert(0) += 1;
            }
            // Most frequent part, smallest id on ties.
            let Some((&top, &c)) = counts.iter().rev().max_by_key(|&(_, &c)| c) else { continue };
            if top != label[v] && 2 * c > g.degree(v) {
                label[v] = top;
                moves += 1;
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

/// How each nonempty part is tested for quasihomogeneity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum CheckMode {
    /// Exhaustive; parts larger than the exact cap are an error.
    Exact,
    Heuristic { budget: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartReport<T> {
    pub label: u32,
    pub size: usize,
    pub fraction: T,
    pub above_threshold: bool,
    pub verdict: QuasihomVerdict<T>,
    /// `Holds` (exact) or no certified violation (heuristic).
    pub quasihomogeneous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionVerdict<T> {
    pub deleted: usize,
    pub edges: usize,
    /// `δ |E(G)|`.
    pub deleted_limit: T,
    pub deleted_ok: bool,
    pub empty_size: usize,
    pub empty_edgeless: bool,
    /// `|V(G_∅)| < δ n` and `G_∅` edgeless.
    pub empty_ok: bool,
    pub threshold: T,
    pub parts: Vec<PartReport<T>>,
    pub sizes_ok: bool,
    pub quasihomogeneous_ok: bool,
    pub mode: CheckMode,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyParams<T> {
    pub delta: T,
    pub lambda: T,
    pub epsilon: T,
    pub radius: usize,
    pub mode: CheckMode,
    pub threshold_mode: ThresholdMode,
    /// `K` in the size threshold; defaults to the partition's part count.
    pub k: Option<u32>,
}

pub fn verify_partition<T: Scalar>(
    g: &Graph,
    p: &Partition,
    params: &VerifyParams<T>,
) -> Result<PartitionVerdict<T>, PartitionError> {
    p.validate(g)?;
    let qp = QuasihomParams::new(params.epsilon.clone(), params.lambda.clone(), params.delta.clone(), params.radius)?;
    let n = g.n();
    let edges = g.edge_count();
    let deleted = p.deleted_edges.len();
    let deleted_limit = params.delta.clone() * T::from_int(edges as i64);
    let deleted_ok = T::from_int(deleted as i64) <= deleted_limit;

    let residual = p.residual(g);
    let empty = p.members(None);
    let empty_edgeless = empty.ids().iter().all(|&v| residual.neighbors(v).iter().all(|&w| p.parts[w].is_some()));
    let empty_ok = empty_edgeless && T::from_int(empty.len() as i64) < params.delta.clone() * T::from_int(n as i64);

    let k = params.k.unwrap_or(p.k).max(1);
    let threshold = size_threshold(&params.delta, g.degree_bound(), k, params.threshold_mode);
    let sizes = p.part_sizes();
    let parts: Vec<PartReport<T>> = (1..=p.k)
        .into_par_iter()
        .filter(|&i| sizes[i as usize] > 0)
        .map(|i| {
            let size = sizes[i as usize];
            let fraction = T::from_ratio(size as i64, n as i64);
            let sub = crate::graph::spanned_subgraph(&residual, &p.members(Some(i))).graph;
            let verdict = match params.mode {
                CheckMode::Exact => check_exact(&sub, &qp)?,
                CheckMode::Heuristic { budget, seed } => falsify_heuristic(&sub, &qp, budget, seed)?,
            };
            let quasihomogeneous = match params.mode {
                CheckMode::Exact => verdict.status == VerdictStatus::Holds,
                CheckMode::Heuristic { .. } => !verdict.is_certified_violation(),
            };
            Ok(PartReport { label: i, size, above_threshold: fraction > threshold, fraction, verdict, quasihomogeneous })
        })
        .collect::<Result<_, PartitionError>>()?;
    let sizes_ok = parts.iter().all(|r| r.above_threshold);
    let quasihomogeneous_ok = parts.iter().all(|r| r.quasihomogeneous);
    Ok(PartitionVerdict {
        deleted,
        edges,
        deleted_limit,
        deleted_ok,
        empty_size: empty.len(),
        empty_edgeless,
        empty_ok,
        threshold,
        parts,
        sizes_ok,
        quasihomogeneous_ok,
        mode: params.mode,
        pass: deleted_ok && empty_ok && sizes_ok && quasihomogeneous_ok,
    })
}

/// One graph of a split sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEntry<T> {
    pub n: usize,
    /// Edges joining different parts (the empty part counting as one), over `n`.
    pub cross_edge_ratio: T,
    /// `a_0` (empty part) followed by `a_1..a_K`.
    pub part_fractions: Vec<T>,
    /// Statistics of each nonempty part, index aligned with `part_fractions`.
    pub part_stats: Vec<Option<StatVector<T>>>,
    /// `stat(⊔ G_i) = Σ a_i stat(G_i)` with exact equality.
    pub mixture_identity: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitReport<T> {
    pub k: u32,
    pub radius: usize,
    pub entries: Vec<SplitEntry<T>>,
    pub cross_ratio_decreasing: bool,
    /// `drift[j][i]`: `d_s` of part `i` between entries `j` and `j + 1`,
    /// when the part is nonempty in both.
    pub drift: Vec<Vec<Option<Distance<T>>>>,
}

pub fn splitting_diagnostics<T: Scalar>(
    sequence: &[(Graph, Partition)],
    radius: usize,
) -> Result<SplitReport<T>, PartitionError> {
    let k = sequence.first().ok_or(PartitionError::EmptySequence)?.1.k;
    let mut entries = Vec::with_capacity(sequence.len());
    for (g, p) in sequence {
        if p.k != k {
            return Err(PartitionError::KMismatch(k, p.k));
        }
        p.validate(g)?;
        let n = g.n();
        let cross = g.edge_iter().filter(|&(u, v)| p.parts[u] != p.parts[v]).count();
        let residual = p.residual(g);
        let sizes = p.part_sizes();
        let mut part_stats = Vec::with_capacity(sizes.len());
        for (i, &s) in sizes.iter().enumerate() {
            let label = if i == 0 { None } else { Some(i as u32) };
            part_stats.push(if s == 0 {
                None
            } else {
                let sub = crate::graph::spanned_subgraph(&residual, &p.members(label)).graph;
                Some(stat_vector::<T>(&sub, radius, Decorations::plain())?)
            });
        }
        let part_fractions: Vec<T> = sizes.iter().map(|&s| T::from_ratio(s as i64, n as i64)).collect();
        let weighted: Vec<(T, &StatVector<T>)> = part_fractions
            .iter()
            .zip(&part_stats)
            .filter_map(|(a, s)| s.as_ref().map(|s| (a.clone(), s)))
            .collect();
        let mixed = mixture(&weighted)?;
        let whole = stat_vector::<T>(&residual, radius, Decorations::plain())?;
        entries.push(SplitEntry {
            n,
            cross_edge_ratio: T::from_ratio(cross as i64, n as i64),
            part_fractions,
            part_stats,
            mixture_identity: mixed == whole,
        });
    }
    let cross_ratio_decreasing = entries.windows(2).all(|w| w[1].cross_edge_ratio < w[0].cross_edge_ratio);
    let drift = entries
        .windows(2)
        .map(|w| {
            w[0].part_stats
                .iter()
                .zip(&w[1].part_stats)
                .map(|(a, b)| match (a, b) {
                    (Some(a), Some(b)) => d_s(a, b).ok(),
                    _ => None,
                })
                .collect()
        })
        .collect();
    Ok(SplitReport { k, radius, entries, cross_ratio_decreasing, drift })
}

/// Part-wise comparison of two partitions with matching labels: `d_s` of
/// the part statistics and the gap in size fractions. Used to check
/// empirically that statistically close graphs decompose alike.
#[derive(Debug, Clone, PartialEq)]
pub struct PartComparison<T> {
    pub label: u32,
    pub distance: Option<Distance<T>>,
    pub size_gap: T,
}

pub fn compare_partitions<T: Scalar>(
    g: &Graph,
    pg: &Partition,
    h: &Graph,
    ph: &Partition,
    radius: usize,
) -> Result<Vec<PartComparison<T>>, PartitionError> {
    pg.validate(g)?;
    ph.validate(h)?;
    let (rg, rh) = (pg.residual(g), ph.residual(h));
    let (sg, sh) = (pg.part_sizes(), ph.part_sizes());
    (1..=pg.k.max(ph.k))
        .map(|i| {
            let size = |sizes: &[usize], n: usize| T::from_ratio(*sizes.get(i as usize).unwrap_or(&0) as i64, n.max(1) as i64);
            let stat = |gr: &Graph, p: &Partition| -> Result<Option<StatVector<T>>, PartitionError> {
                let m = p.members(Some(i));
                if m.is_empty() {
                    return Ok(None);
                }
                Ok(Some(stat_vector(&crate::graph::spanned_subgraph(gr, &m).graph, radius, Decorations::plain())?))
            };
            let distance = match (stat(&rg, pg)?, stat(&rh, ph)?) {
                (Some(a), Some(b)) => Some(d_s(&a, &b)?),
                _ => None,
            };
            Ok(PartComparison { label: i, distance, size_gap: (size(&sg, g.n()) - size(&sh, h.n())).abs() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, FamilySpec};
    use crate::Rational;

    fn q(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, 2, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn params(k_max: u32, m: usize) -> DecomposeParams<Rational> {
        DecomposeParams { delta: q(1, 10), lambda: q(3, 10), k_max, signature_radius: m, seed: 0, threshold_mode: ThresholdMode::Statement }
    }

    #[test]
    fn two_cycles_split() {
        let g = cycle(4).disjoint_union(&cycle(6));
        let p = decompose(&g, &params(2, 2)).unwrap();
        assert_eq!(p.k, 2);
        assert!(p.deleted_edges.is_empty());
        assert_eq!(p.parts, [vec![Some(1); 4], vec![Some(2); 6]].concat());
    }

    #[test]
    fn planted_bridges_are_cut() {
        let spec = FamilySpec::bridged(FamilySpec::torus(8), FamilySpec::RandomRegular { n: 64, d: 3, seed: 4 }, 3, 9);
        let g = generate(&spec).unwrap();
        let p = decompose(&g, &params(2, 1)).unwrap();
        assert_eq!(p.k, 2);
        assert_eq!(p.deleted_edges.len(), 3);
        assert!(p.parts[..64].iter().all(|&x| x == Some(1)));
        assert!(p.parts[64..].iter().all(|&x| x == Some(2)));
    }

    #[test]
    fn torus_is_one_part() {
        let g = generate(&FamilySpec::torus(10)).unwrap();
        for k in [1, 2, 5] {
            let p = decompose(&g, &params(k, 2)).unwrap();
            assert_eq!(p, Partition::trivial(&g));
        }
    }

    #[test]
    fn absorb_examples() {
        // A single-vertex part in a 1000-vertex graph with d = 3, K = 5: at
        // δ = 1/10 both thresholds (1/15000 and 1/1500) are below 1/1000, so
        // the part stays; at δ = 1/2 the statement threshold is 1/600.
        let g = cycle(1000).with_degree_bound(3).unwrap();
        let mut parts = vec![Some(1); 1000];
        parts[500] = Some(2);
        let p = Partition::from_assignment(&g, 2, parts).unwrap();
        for mode in [ThresholdMode::Statement, ThresholdMode::Proof] {
            assert_eq!(absorb_small_parts(&g, &p, &q(1, 10), 5, mode).unwrap(), p);
        }
        let a = absorb_small_parts(&g, &p, &q(1, 2), 5, ThresholdMode::Statement).unwrap();
        assert_eq!(a.parts[500], None);
        assert_eq!(a.k, 1);
        assert_eq!(a.deleted_edges, p.deleted_edges);
        assert_eq!(absorb_small_parts(&g, &a, &q(1, 2), 5, ThresholdMode::Statement).unwrap(), a);

        // Two tiny parts: 3 vertices with 2 internal edges, 2 with 1.
        let g = cycle(1000);
        let mut parts = vec![Some(1); 1000];
        parts[10..13].fill(Some(2));
        parts[20..22].fill(Some(3));
        let p = Partition::from_assignment(&g, 3, parts).unwrap();
        let a = absorb_small_parts(&g, &p, &q(1, 2), 3, ThresholdMode::Proof).unwrap();
        assert_eq!(a.deleted_edges.len(), p.deleted_edges.len() + 3);
        assert_eq!(a.part_sizes()[0], 5);

        // Nothing below threshold.
        let p = Partition::from_assignment(&g, 2, [vec![Some(1); 500], vec![Some(2); 500]].concat()).unwrap();
        assert_eq!(absorb_small_parts(&g, &p, &q(1, 10), 2, ThresholdMode::Statement).unwrap(), p);
    }

    fn vp(mode: CheckMode, delta: Rational) -> VerifyParams<Rational> {
        VerifyParams { delta, lambda: q(3, 10), epsilon: q(1, 20), radius: 2, mode, threshold_mode: ThresholdMode::Statement, k: None }
    }

    #[test]
    fn verify_examples() {
        let torus = generate(&FamilySpec::torus(6)).unwrap();
        let v = verify_partition(&torus, &Partition::trivial(&torus), &vp(CheckMode::Heuristic { budget: 2000, seed: 1 }, q(1, 5)))
            .unwrap();
        assert!(v.pass);

        let c10 = cycle(10);
        let all_gone = Partition::from_assignment(&c10, 10, (1..=10).map(Some).collect()).unwrap();
        assert_eq!(all_gone.deleted_edges.len(), 10);
        let v = verify_partition(&c10, &all_gone, &vp(CheckMode::Heuristic { budget: 10, seed: 1 }, q(9, 10))).unwrap();
        assert!(!v.deleted_ok && !v.pass);

        // One vertex out of 100 at δ = 3/10: the statement threshold
        // δ²/(10dK) is at most 0.009 < 1/100, so only the proof threshold
        // with dK ≤ 3 rejects it.
        let g = cycle(100);
        let mut parts = vec![Some(1); 100];
        parts[0] = Some(2);
        let p = Partition::from_assignment(&g, 2, parts).unwrap();
        let heur = CheckMode::Heuristic { budget: 10, seed: 1 };
        assert!(verify_partition(&g, &p, &vp(heur, q(3, 10))).unwrap().sizes_ok);
        let strict = VerifyParams { threshold_mode: ThresholdMode::Proof, k: Some(1), ..vp(heur, q(3, 10)) };
        let v = verify_partition(&g, &p, &strict).unwrap();
        assert_eq!(v.threshold, q(3, 200));
        assert!(!v.sizes_ok && !v.pass);
    }

    #[test]
    fn inconsistent_partition_rejected() {
        let g = cycle(6);
        let mut p = Partition::from_assignment(&g, 2, [vec![Some(1); 3], vec![Some(2); 3]].concat()).unwrap();
        p.deleted_edges.pop();
        assert!(matches!(p.validate(&g), Err(PartitionError::InconsistentPartition(_))));
        assert!(Partition::from_assignment(&g, 1, vec![Some(2); 6]).is_err());
    }

    #[test]
    fn split_cycles_mixture_exact() {
        let seq: Vec<(Graph, Partition)> = [6usize, 8, 10, 12]
            .iter()
            .map(|&n| {
                let g = cycle(n);
                let parts = (0..n).map(|v| Some(if v < n / 2 { 1 } else { 2 })).collect();
                let p = Partition::from_assignment(&g, 2, parts).unwrap();
                (g, p)
            })
            .collect();
        let r = splitting_diagnostics::<Rational>(&seq, 2).unwrap();
        assert!(r.entries.iter().all(|e| e.mixture_identity));
        assert!(r.cross_ratio_decreasing);

        let g = cycle(9);
        let single = splitting_diagnostics::<Rational>(&[(g.clone(), Partition::trivial(&g))], 3).unwrap();
        assert_eq!(single.entries[0].part_stats[1].as_ref().unwrap(), &stat_vector::<Rational>(&g, 3, Decorations::plain()).unwrap());
        let bad = [(g.clone(), Partition::trivial(&g)), seq[0].clone()];
        assert_eq!(splitting_diagnostics::<Rational>(&bad, 2).unwrap_err(), PartitionError::KMismatch(1, 2));
    }
}
