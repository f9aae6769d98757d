//! Rooted balls and their canonical codes.
//!
//! A ball is canonicalized by individualization-refinement: vertices start
//! colored by (distance from root, label), colors are refined by neighbor
//! multisets (including edge colors), and any remaining non-singleton cell
//! is split by trying each member in turn. The lexicographically least
//! serialization over the search tree is the code. Automorphisms found at
//! equal leaves prune sibling branches that lie in the same orbit.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{ball_within, Graph};

const CODE_VERSION: u8 = 1;
const FLAG_LABELS: u8 = 1;
const FLAG_COLORS: u8 = 2;
const HEADER_LEN: usize = 7;

/// Per-vertex bit-string labels of a common width (at most 64 digits).
/// Digit 0 is the most significant bit of the stored value.
#[derive(Debug, Clone, Copy)]
pub struct LabelView<'a> {
    pub values: &'a [u64],
    pub width: u8,
}

/// Optional vertex labels and edge colors carried into balls.
/// `edge_colors[u][i]` is the color of the edge to `g.neighbors(u)[i]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Decorations<'a> {
    pub labels: Option<LabelView<'a>>,
    pub edge_colors: Option<&'a [Vec<u32>]>,
}

impl<'a> Decorations<'a> {
    pub fn plain() -> Decorations<'static> {
        Decorations::default()
    }

    pub fn is_plain(&self) -> bool {
        self.labels.is_none() && self.edge_colors.is_none()
    }
}

/// Graph rooted at local vertex 0, with all vertices within `radius` of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedBall {
    adjacency: Vec<Vec<usize>>,
    radius: usize,
    degree_bound: usize,
    labels: Option<(Vec<u64>, u8)>,
    edge_colors: Option<Vec<Vec<u32>>>,
}

impl RootedBall {
    /// Builds a ball from local adjacency (root = 0). Rows must be symmetric;
    /// they are sorted here together with any edge colors.
    pub fn new(
        adjacency: Vec<Vec<usize>>,
        radius: usize,
        labels: Option<(Vec<u64>, u8)>,
        edge_colors: Option<Vec<Vec<u32>>>,
    ) -> RootedBall {
        let degree_bound = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let mut ball = RootedBall { adjacency, radius, degree_bound, labels, edge_colors };
        ball.sort_rows();
        ball
    }

    fn sort_rows(&mut self) {
        match &mut self.edge_colors {
            Some(colors) => {
                for (row, crow) in self.adjacency.iter_mut().zip(colors.iter_mut()) {
                    let mut pairs: Vec<(usize, u32)> = row.iter().copied().zip(crow.iter().copied()).collect();
                    pairs.sort_unstable();
                    *row = pairs.iter().map(|p| p.0).collect();
                    *crow = pairs.iter().map(|p| p.1).collect();
                }
            }
            None => self.adjacency.iter_mut().for_each(|row| row.sort_unstable()),
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn labels(&self) -> Option<(&[u64], u8)> {
        self.labels.as_ref().map(|(v, w)| (v.as_slice(), *w))
    }

    pub fn edge_colors(&self) -> Option<&[Vec<u32>]> {
        self.edge_colors.as_deref()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, row) in self.adjacency.iter().enumerate() {
            out.extend(row.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    /// Color of edge `u`–`v`, if edge colors are present and the edge exists.
    pub fn edge_color(&self, u: usize, v: usize) -> Option<u32> {
        let i = self.adjacency[u].binary_search(&v).ok()?;
        self.edge_colors.as_ref().map(|c| c[u][i])
    }

    /// Same ball with labels and colors dropped.
    pub fn plain(&self) -> RootedBall {
        RootedBall { labels: None, edge_colors: None, ..self.clone() }
    }

    /// Applies `perm` (old local id -> new local id). `perm[0]` must be 0.
    pub fn permuted(&self, perm: &[usize]) -> RootedBall {
        assert_eq!(perm[0], 0, "root must stay at position 0");
        let n = self.n();
        let mut adjacency = vec![Vec::new(); n];
        let mut colors = self.edge_colors.as_ref().map(|_| vec![Vec::new(); n]);
        for u in 0..n {
            for (i, &v) in self.adjacency[u].iter().enumerate() {
                adjacency[perm[u]].push(perm[v]);
                if let (Some(out), Some(src)) = (colors.as_mut(), self.edge_colors.as_ref()) {
                    out[perm[u]].push(src[u][i]);
                }
            }
        }
        let labels = self.labels.as_ref().map(|(vals, w)| {
            let mut out = vec![0; n];
            for u in 0..n {
                out[perm[u]] = vals[u];
            }
            (out, *w)
        });
        RootedBall::new(adjacency, self.radius, labels, colors)
    }

    fn root_distances(&self) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        dist[0] = 0;
        let mut queue = std::collections::VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Canonical serialization of a rooted ball.
///
/// Layout: version byte, radius (u16 LE), vertex count (u16 LE), flags,
/// label width; then per vertex in canonical order its degree (u8) and
/// sorted neighbor positions (u16 LE); then labels (u64 LE) if flagged;
/// then per row the edge colors (u32 LE) aligned with the neighbor lists.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BallCode(Vec<u8>);

impl fmt::Debug for BallCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BallCode(r={}, n={}, {})", self.radius(), self.vertex_count(), self.to_hex())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodeError {
    #[error("invalid hex in ball code")]
    Hex,
    #[error("ball code truncated or malformed")]
    Malformed,
}

impl BallCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn radius(&self) -> usize {
        u16::from_le_bytes([self.0[1], self.0[2]]) as usize
    }

    pub fn vertex_count(&self) -> usize {
        u16::from_le_bytes([self.0[3], self.0[4]]) as usize
    }

    pub fn has_labels(&self) -> bool {
        self.0[5] & FLAG_LABELS != 0
    }

    pub fn has_edge_colors(&self) -> bool {
        self.0[5] & FLAG_COLORS != 0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(hex: &str) -> Result<BallCode, CodeError> {
        if hex.len() % 2 != 0 {
            return Err(CodeError::Hex);
        }
        let bytes = (0..hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(hex.get(i..i + 2).ok_or(CodeError::Hex)?, 16).map_err(|_| CodeError::Hex))
            .collect::<Result<Vec<u8>, _>>()?;
        let code = BallCode(bytes);
        code.decode()?;
        Ok(code)
    }

    /// Reconstructs the ball in canonical vertex order.
    pub fn decode(&self) -> Result<RootedBall, CodeError> {
        let b = &self.0;
        if b.len() < HEADER_LEN || b[0] != CODE_VERSION {
            return Err(CodeError::Malformed);
        }
        let n = self.vertex_count();
        let width = b[6];
        let mut at = HEADER_LEN;
        let mut take = |len: usize| -> Result<&[u8], CodeError> {
            let s = b.get(at..at + len).ok_or(CodeError::Malformed)?;
            at += len;
            Ok(s)
        };
        let mut adjacency = Vec::with_capacity(n);
        for _ in 0..n {
            let deg = take(1)?[0] as usize;
            let row = take(2 * deg)?
                .chunks(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]) as usize)
                .collect::<Vec<_>>();
            if row.iter().any(|&v| v >= n) {
                return Err(CodeError::Malformed);
            }
            adjacency.push(row);
        }
        let labels = if self.has_labels() {
            let vals = take(8 * n)?.chunks(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
            Some((vals, width))
        } else {
            None
        };
        let edge_colors = if self.has_edge_colors() {
            let mut rows = Vec::with_capacity(n);
            for row in &adjacency {
                rows.push(
                    take(4 * row.len())?
                        .chunks(4)
                        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
                        .collect(),
                );
            }
            Some(rows)
        } else {
            None
        };
        if at != b.len() {
            return Err(CodeError::Malformed);
        }
        Ok(RootedBall::new(adjacency, self.radius(), labels, edge_colors))
    }
}

/// Induced subgraph on the vertices within distance `r` of `x`, rooted at `x`.
pub fn extract_ball(g: &Graph, x: usize, r: usize, decor: Decorations<'_>) -> RootedBall {
    extract_ball_within(g, x, r, decor, |_| true)
}

/// Ball around `x` in the subgraph spanned by the vertices accepted by `member`.
/// `x` is assumed to be a member.
pub fn extract_ball_within(
    g: &Graph,
    x: usize,
    r: usize,
    decor: Decorations<'_>,
    member: impl Fn(usize) -> bool,
) -> RootedBall {
    let order = ball_within(g, x, r, &member);
    let local: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adjacency = Vec::with_capacity(order.len());
    let mut colors = decor.edge_colors.map(|_| Vec::with_capacity(order.len()));
    for &u in &order {
        let mut row = Vec::new();
        let mut crow = Vec::new();
        for (i, &w) in g.neighbors(u).iter().enumerate() {
            if let Some(&lw) = local.get(&w) {
                row.push(lw);
                if let Some(ec) = decor.edge_colors {
                    crow.push(ec[u][i]);
                }
            }
        }
        adjacency.push(row);
        if let Some(c) = colors.as_mut() {
            c.push(crow);
        }
    }
    let labels = decor.labels.map(|lv| (order.iter().map(|&v| lv.values[v]).collect(), lv.width));
    let mut ball = RootedBall::new(adjacency, r, labels, colors);
    ball.degree_bound = g.degree_bound();
    ball
}

/// Canonical code; equal for two balls iff they are isomorphic as rooted,
/// labeled, edge-colored graphs of the same radius.
pub fn canonical_code(ball: &RootedBall) -> BallCode {
    let dist = ball.root_distances();
    let keys: Vec<(usize, u64)> = (0..ball.n())
        .map(|v| (dist[v], ball.labels.as_ref().map_or(0, |(l, _)| l[v])))
        .collect();
    let start = rank(&keys);
    let mut search = Search { ball, first: None, best: None, autos: Vec::new() };
    let refined = search.refine(start);
    search.visit(refined, &mut Vec::new());
    BallCode(search.best.expect("search reaches at least one leaf").code)
}

/// Code of the radius-`r` ball around `x`.
pub fn ball_code(g: &Graph, x: usize, r: usize, decor: Decorations<'_>) -> BallCode {
    canonical_code(&extract_ball(g, x, r, decor))
}

/// Radius-`r` code of every vertex, computed in parallel.
pub fn vertex_codes(g: &Graph, r: usize, decor: Decorations<'_>) -> Vec<BallCode> {
    (0..g.n()).into_par_iter().map(|x| ball_code(g, x, r, decor)).collect()
}

/// Number of vertices per occurring radius-`r` code. Counts sum to `g.n()`.
pub fn ball_census(g: &Graph, r: usize, decor: Decorations<'_>) -> BTreeMap<BallCode, usize> {
    let mut census = BTreeMap::new();
    for code in vertex_codes(g, r, decor) {
        *census.entry(code).or_insert(0) += 1;
    }
    census
}

/// Dense ranks of `keys`, ordered by key.
fn rank<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut out = vec![0u32; keys.len()];
    let mut next = 0u32;
    for (i, &v) in idx.iter().enumerate() {
        if i > 0 && keys[idx[i - 1]] != keys[v] {
            next += 1;
        }
        out[v] = next;
    }
    out
}

struct Leaf {
    code: Vec<u8>,
    /// `order[pos]` is the vertex placed at canonical position `pos`.
    order: Vec<usize>,
    path: Vec<usize>,
}

struct Search<'a> {
    ball: &'a RootedBall,
    first: Option<Leaf>,
    best: Option<Leaf>,
    autos: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        let ball = self.ball;
        let mut cells = colors.iter().max().map_or(0, |&m| m + 1);
        loop {
            let sigs: Vec<(u32, Vec<(u32, u32)>)> = (0..ball.n())
                .map(|v| {
                    let mut nb: Vec<(u32, u32)> = ball.adjacency[v]
                        .iter()
                        .enumerate()
                        .map(|(i, &w)| (colors[w], ball.edge_colors.as_ref().map_or(0, |c| c[v][i])))
                        .collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            let next = rank(&sigs);
            let next_cells = next.iter().max().map_or(0, |&m| m + 1);
            colors = next;
            if next_cells == cells {
                return colors;
            }
            cells = next_cells;
        }
    }

    fn visit(&mut self, colors: Vec<u32>, path: &mut Vec<usize>) -> Option<usize> {
        let n = colors.len();
        let mut sizes = vec![0usize; n];
        for &c in &colors {
            sizes[c as usize] += 1;
        }
        let Some(target) = sizes.iter().position(|&s| s > 1) else {
            return self.leaf(&colors, path);
        };
        let members: Vec<usize> = (0..n).filter(|&v| colors[v] as usize == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &members {
            if !explored.is_empty() && self.in_explored_orbit(path, &explored, v) {
                continue;
            }
            explored.push(v);
            let split: Vec<(u32, bool)> = (0..n).map(|u| (colors[u], colors[u] as usize == target && u != v)).collect();
            let child = self.refine(rank(&split));
            path.push(v);
            let jump = self.visit(child, path);
            path.pop();
            if let Some(level) = jump {
                if level < path.len() {
                    return Some(level);
                }
            }
        }
        None
    }

    /// Whether some automorphism fixing `path` pointwise maps an explored
    /// candidate onto `v`.
    fn in_explored_orbit(&self, path: &[usize], explored: &[usize], v: usize) -> bool {
        let n = self.ball.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for gamma in self.autos.iter().filter(|g| path.iter().all(|&p| g[p] == p)) {
            for (x, &y) in gamma.iter().enumerate() {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let root = find(&mut parent, v);
        explored.iter().any(|&e| find(&mut parent, e) == root)
    }

    fn leaf(&mut self, colors: &[u32], path: &[usize]) -> Option<usize> {
        let mut order = vec![0usize; colors.len()];
        for (v, &c) in colors.iter().enumerate() {
            order[c as usize] = v;
        }
        let code = serialize(self.ball, &order);
        let Some(first) = &self.first else {
            let leaf = Leaf { code, order, path: path.to_vec() };
            self.best = Some(Leaf { code: leaf.code.clone(), order: leaf.order.clone(), path: leaf.path.clone() });
            self.first = Some(leaf);
            return None;
        };
        if code == first.code {
            let gamma = map_between(&first.order, &order);
            let common = first.path.iter().zip(path).take_while(|(a, b)| a == b).count();
            let jump = common < path.len()
                && common < first.path.len()
                && first.path[..common].iter().all(|&p| gamma[p] == p)
                && gamma[first.path[common]] == path[common];
            self.autos.push(gamma);
            return jump.then_some(common);
        }
        let best = self.best.as_mut().unwrap();
        if code == best.code {
            let gamma = map_between(&best.order, &order);
            self.autos.push(gamma);
        } else if code < best.code {
            *best = Leaf { code, order, path: path.to_vec() };
        }
        None
    }
}

/// Permutation sending `from[i]` to `to[i]`.
fn map_between(from: &[usize], to: &[usize]) -> Vec<usize> {
    let mut gamma = vec![0; from.len()];
    for (a, b) in from.iter().zip(to) {
        gamma[*a] = *b;
    }
    gamma
}

fn serialize(ball: &RootedBall, order: &[usize]) -> Vec<u8> {
    let n = ball.n();
    let mut pos = vec![0usize; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let mut flags = 0u8;
    if ball.labels.is_some() {
        flags |= FLAG_LABELS;
    }
    if ball.edge_colors.is_some() {
        flags |= FLAG_COLORS;
    }
    let radius = u16::try_from(ball.radius).expect("radius fits in u16");
    let count = u16::try_from(n).expect("ball size fits in u16");
    let mut out = Vec::with_capacity(HEADER_LEN + 3 * n * (ball.degree_bound + 1));
    out.push(CODE_VERSION);
    out.extend_from_slice(&radius.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.push(flags);
    out.push(ball.labels.as_ref().map_or(0, |(_, w)| *w));
    let rows: Vec<Vec<(usize, u32)>> = order
        .iter()
        .map(|&v| {
            let mut row: Vec<(usize, u32)> = ball.adjacency[v]
                .iter()
                .enumerate()
                .map(|(i, &w)| (pos[w], ball.edge_colors.as_ref().map_or(0, |c| c[v][i])))
                .collect();
            row.sort_unstable();
            row
        })
        .collect();
    for row in &rows {
        out.push(u8::try_from(row.len()).expect("degree fits in u8"));
        for &(p, _) in row {
            out.extend_from_slice(&(p as u16).to_le_bytes());
        }
    }
    if let Some((labels, _)) = &ball.labels {
        for &v in order {
            out.extend_from_slice(&labels[v].to_le_bytes());
        }
    }
    if ball.edge_colors.is_some() {
        for row in &rows {
            for &(_, c) in row {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
    }
    out
}
