//! Proper edge colorings built from vertex colorings of the square graph,
//! and seeded random bit-string vertex labels.
//!
//! A proper vertex coloring of the square graph gives adjacent vertices, and
//! vertices with a common neighbor, different colors. Coloring each edge by
//! the unordered pair of its endpoint colors is then a proper edge coloring:
//! two edges at `x` lead to endpoints that are square-adjacent.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::{Decorations, LabelView};
use crate::graph::{square_graph, Graph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("vertex coloring is not proper on the square graph: {0} and {1} share color {2}")]
    ImproperInputColoring(usize, usize, u32),
    #[error("coloring covers {found} vertices, graph has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("vertex {vertex} has color 0; colors start at 1")]
    ZeroColor { vertex: usize },
    #[error("label width must be in 1..=64, got {0}")]
    BadWidth(u32),
}

/// Colors `1..=palette` per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexColoring {
    pub colors: Vec<u32>,
    pub palette: u32,
}

impl VertexColoring {
    pub fn used_colors(&self) -> u32 {
        self.colors.iter().copied().max().unwrap_or(0)
    }

    /// First monochromatic edge of `g`, if any.
    pub fn conflict(&self, g: &Graph) -> Option<(usize, usize)> {
        g.edge_iter().find(|&(u, v)| self.colors[u] == self.colors[v])
    }

    pub fn is_proper_on(&self, g: &Graph) -> bool {
        self.colors.len() == g.n() && self.conflict(g).is_none()
    }
}

/// Greedy coloring of the square graph: vertices in ascending id order take
/// the least color not used by an already-colored square neighbor. Never
/// needs more than `d^2 + 1` colors.
pub fn greedy_square_coloring(g: &Graph) -> VertexColoring {
    let sq = square_graph(g);
    let d = g.degree_bound() as u32;
    let palette = d * d + 1;
    let mut colors = vec![0u32; g.n()];
    let mut taken = vec![usize::MAX; palette as usize + 2];
    for v in 0..g.n() {
        for &w in sq.neighbors(v) {
            if colors[w] != 0 {
                taken[colors[w] as usize] = v;
            }
        }
        colors[v] = (1..).find(|&c| taken[c as usize] != v).unwrap();
    }
    VertexColoring { colors, palette }
}

/// 1-based rank of the unordered pair `{i, j}` (`1 ≤ i < j ≤ c`) in the
/// order (1,2), (1,3), ..., (1,c), (2,3), ...
pub fn pair_index(i: u32, j: u32, c: u32) -> u32 {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    (i - 1) * c - (i - 1) * i / 2 + (j - i)
}

/// Inverse of [`pair_index`].
pub fn pair_from_index(index: u32, c: u32) -> (u32, u32) {
    let mut rest = index;
    for i in 1..c {
        let row = c - i;
        if rest <= row {
            return (i, i + rest);
        }
        rest -= row;
    }
    panic!("pair index {index} out of range for palette {c}");
}

/// Each edge colored by the unordered pair of its endpoint colors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeColoring {
    /// Edges `(u, v)`, `u < v`, ascending.
    pub edges: Vec<(usize, usize)>,
    /// Endpoint color pair `(i, j)`, `i < j`, per edge.
    pub pairs: Vec<(u32, u32)>,
    /// Vertex palette `c`; the edge palette is `c·(c−1)/2`.
    pub vertex_palette: u32,
}

impl EdgeColoring {
    pub fn edge_palette(&self) -> u32 {
        self.vertex_palette * self.vertex_palette.saturating_sub(1) / 2
    }

    pub fn color_indices(&self) -> Vec<u32> {
        self.pairs.iter().map(|&(i, j)| pair_index(i, j, self.vertex_palette)).collect()
    }

    pub fn color_of(&self, u: usize, v: usize) -> Option<u32> {
        let key = (u.min(v), u.max(v));
        let i = self.edges.binary_search(&key).ok()?;
        let (a, b) = self.pairs[i];
        Some(pair_index(a, b, self.vertex_palette))
    }

    /// Color indices aligned with `g`'s neighbor lists, for ball extraction.
    pub fn adjacency_colors(&self, g: &Graph) -> Vec<Vec<u32>> {
        (0..g.n())
            .map(|u| g.neighbors(u).iter().map(|&v| self.color_of(u, v).expect("edge of host graph")).collect())
            .collect()
    }

    /// First pair of distinct edges sharing an endpoint and a color.
    pub fn conflict(&self, g: &Graph) -> Option<((usize, usize), (usize, usize))> {
        let colors = self.adjacency_colors(g);
        for u in 0..g.n() {
            let row = &colors[u];
            for a in 0..row.len() {
                for b in a + 1..row.len() {
                    if row[a] == row[b] {
                        let (x, y) = (g.neighbors(u)[a], g.neighbors(u)[b]);
                        return Some(((u.min(x), u.max(x)), (u.min(y), u.max(y))));
                    }
                }
            }
        }
        None
    }

    pub fn is_proper_on(&self, g: &Graph) -> bool {
        self.edges == g.edges() && self.conflict(g).is_none()
    }

    /// `n d` header, then `u v c` with `c` the 1-based color index.
    pub fn to_colored_edge_list(&self, g: &Graph) -> String {
        let mut out = format!("{} {}\n", g.n(), g.degree_bound());
        for ((u, v), c) in self.edges.iter().zip(self.color_indices()) {
            out.push_str(&format!("{u} {v} {c}\n"));
        }
        out
    }
}

/// Colors every edge by its endpoint color pair. The input must be proper on
/// the square graph of `g`.
pub fn edge_coloring_from_vertex(g: &Graph, vc: &VertexColoring) -> Result<EdgeColoring, ColoringError> {
    if vc.colors.len() != g.n() {
        return Err(ColoringError::SizeMismatch { expected: g.n(), found: vc.colors.len() });
    }
    if let Some(vertex) = vc.colors.iter().position(|&c| c == 0) {
        return Err(ColoringError::ZeroColor { vertex });
    }
    if let Some((u, v)) = vc.conflict(&square_graph(g)) {
        return Err(ColoringError::ImproperInputColoring(u, v, vc.colors[u]));
    }
    let edges = g.edges();
    let pairs = edges
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (vc.colors[u], vc.colors[v]);
            (a.min(b), a.max(b))
        })
        .collect();
    Ok(EdgeColoring { edges, pairs, vertex_palette: vc.palette.max(vc.used_colors()) })
}

/// Greedy square coloring followed by the pair construction.
pub fn square_edge_coloring(g: &Graph) -> (VertexColoring, EdgeColoring) {
    let vc = greedy_square_coloring(g);
    let ec = edge_coloring_from_vertex(g, &vc).expect("greedy coloring is proper on the square graph");
    (vc, ec)
}

/// Uniform `width`-digit bit strings per vertex, reproducible from `seed`.
///
/// Bits come from ChaCha8 (`rand_chacha`) seeded with `seed_from_u64`; vertex
/// `v` takes the `v`-th `next_u64` output and keeps its top `width` bits, so a
/// label and its truncations agree across widths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BLabels {
    pub values: Vec<u64>,
    pub width: u8,
    pub seed: u64,
}

impl BLabels {
    pub fn view(&self) -> LabelView<'_> {
        LabelView { values: &self.values, width: self.width }
    }

    pub fn decorations(&self) -> Decorations<'_> {
        Decorations { labels: Some(self.view()), edge_colors: None }
    }

    /// Keeps the first `k` digits of every label.
    pub fn truncated(&self, k: u8) -> Result<BLabels, ColoringError> {
        if k == 0 || k > self.width {
            return Err(ColoringError::BadWidth(k as u32));
        }
        let shift = self.width - k;
        Ok(BLabels { values: self.values.iter().map(|v| v >> shift).collect(), width: k, seed: self.seed })
    }

    /// Digit `i` (0-based, most significant first) of vertex `v`'s label.
    pub fn digit(&self, v: usize, i: u8) -> bool {
        self.values[v] >> (self.width - 1 - i) & 1 == 1
    }
}

pub fn random_b_labels(n: usize, width: u32, seed: u64) -> Result<BLabels, ColoringError> {
    if width == 0 || width > 64 {
        return Err(ColoringError::BadWidth(width));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n).map(|_| rng.next_u64() >> (64 - width)).collect();
    Ok(BLabels { values, width: width as u8, seed })
}
