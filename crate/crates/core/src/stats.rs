//! Statistic vectors: per-radius distributions of ball codes, the weighted
//! total-variation distance between them, sparse subgraph densities and
//! convex mixtures.
//!
//! The distance is `Σ_{r=1..R} 2^-r · TV_r`, where `TV_r` is the total
//! variation between radius-`r` code distributions. Radii above `R` can
//! contribute at most `2^-R` in total; that amount is reported as the tail.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ball::{canonical_code, vertex_codes, BallCode, Decorations};
use crate::graph::Graph;
use crate::scalar::{is_unit_interval, max_of, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("statistics of an empty graph are undefined")]
    EmptyGraph,
    #[error("statistic radius must be at least 1")]
    ZeroRadius,
    #[error("radius mismatch: {0} vs {1}")]
    RadiusMismatch(usize, usize),
    #[error("mixture weights do not sum to 1")]
    WeightSumNotOne,
    #[error("mixture weights must be nonnegative")]
    NegativeWeight,
    #[error("mixture of no parts")]
    EmptyMixture,
    #[error("frequencies at radius {0} are not a probability distribution")]
    NotNormalized(usize),
    #[error("code at radius {found} stored in layer {layer}")]
    WrongLayer { layer: usize, found: usize },
    #[error("pattern has {size} vertices, cap is {cap}")]
    PatternTooLarge { size: usize, cap: usize },
    #[error("pattern graph is not connected")]
    PatternDisconnected,
}

/// For each radius `1..=R`, a probability distribution over ball codes.
#[derive(Debug, Clone)]
pub struct StatVector<T> {
    layers: Vec<BTreeMap<BallCode, T>>,
    origin_n: Option<usize>,
}

/// Equality of the distributions; the recorded origin size is ignored.
impl<T: PartialEq> PartialEq for StatVector<T> {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

impl<T: Scalar> StatVector<T> {
    /// Validates per-radius distributions: entries in `[0,1]`, summing to one
    /// (exactly for exact scalars, within `1e-9` otherwise).
    pub fn from_layers(layers: Vec<BTreeMap<BallCode, T>>, origin_n: Option<usize>) -> Result<Self, StatsError> {
        if layers.is_empty() {
            return Err(StatsError::ZeroRadius);
        }
        for (i, layer) in layers.iter().enumerate() {
            let r = i + 1;
            if let Some(code) = layer.keys().find(|c| c.radius() != r) {
                return Err(StatsError::WrongLayer { layer: r, found: code.radius() });
            }
            if !layer.values().all(is_unit_interval) {
                return Err(StatsError::NotNormalized(r));
            }
            let total = layer.values().fold(T::zero(), |a, b| a + b.clone());
            let ok = if T::EXACT {
                total == T::one()
            } else {
                (total.to_f64() - 1.0).abs() <= 1e-9
            };
            if !ok {
                return Err(StatsError::NotNormalized(r));
            }
        }
        let layers = layers.into_iter().map(|l| l.into_iter().filter(|(_, v)| !v.is_zero()).collect()).collect();
        Ok(StatVector { layers, origin_n })
    }

    /// Maximum radius `R`.
    pub fn radius(&self) -> usize {
        self.layers.len()
    }

    pub fn origin_n(&self) -> Option<usize> {
        self.origin_n
    }

    /// Distribution at radius `r` (1-based).
    pub fn layer(&self, r: usize) -> &BTreeMap<BallCode, T> {
        &self.layers[r - 1]
    }

    pub fn layers(&self) -> &[BTreeMap<BallCode, T>] {
        &self.layers
    }

    pub fn frequency(&self, code: &BallCode) -> T {
        let r = code.radius();
        if r == 0 || r > self.radius() {
            return T::zero();
        }
        self.layers[r - 1].get(code).cloned().unwrap_or_else(T::zero)
    }

    /// Same distributions truncated to radii `1..=r`.
    pub fn truncated(&self, r: usize) -> StatVector<T> {
        StatVector { layers: self.layers[..r.min(self.radius())].to_vec(), origin_n: self.origin_n }
    }

    /// Pushes every code forward through "drop labels and edge colors".
    pub fn project_plain(&self) -> StatVector<T> {
        let layers = self
            .layers
            .iter()
            .map(|layer| {
                let mut out: BTreeMap<BallCode, T> = BTreeMap::new();
                for (code, p) in layer {
                    let plain = canonical_code(&code.decode().expect("stored codes decode").plain());
                    let slot = out.entry(plain).or_insert_with(T::zero);
                    *slot = slot.clone() + p.clone();
                }
                out
            })
            .collect();
        StatVector { layers, origin_n: self.origin_n }
    }
}

/// Exact census frequencies `|T(G, α)| / |V(G)|` for each radius `1..=R`.
pub fn stat_vector<T: Scalar>(g: &Graph, max_radius: usize, decor: Decorations<'_>) -> Result<StatVector<T>, StatsError> {
    if g.n() == 0 {
        return Err(StatsError::EmptyGraph);
    }
    if max_radius == 0 {
        return Err(StatsError::ZeroRadius);
    }
    let n = g.n() as i64;
    let layers = (1..=max_radius)
        .map(|r| {
            let mut counts: BTreeMap<BallCode, i64> = BTreeMap::new();
            for code in vertex_codes(g, r, decor) {
                *counts.entry(code).or_insert(0) += 1;
            }
            counts.into_iter().map(|(c, k)| (c, T::from_ratio(k, n))).collect()
        })
        .collect();
    Ok(StatVector { layers, origin_n: Some(g.n()) })
}

/// Truncated distance together with the bound on what radii above `R` add.
#[derive(Debug, Clone, PartialEq)]
pub struct Distance<T> {
    pub value: T,
    pub tail: T,
}

impl<T: Scalar> Distance<T> {
    /// Upper bound on the untruncated distance.
    pub fn upper(&self) -> T {
        self.value.clone() + self.tail.clone()
    }
}

/// Total variation `½ Σ |p(α) − q(α)|` between two code distributions.
pub fn total_variation<T: Scalar>(p: &BTreeMap<BallCode, T>, q: &BTreeMap<BallCode, T>) -> T {
    let mut sum = T::zero();
    for (code, a) in p {
        let b = q.get(code).cloned().unwrap_or_else(T::zero);
        sum = sum + (a.clone() - b).abs();
    }
    for (code, b) in q {
        if !p.contains_key(code) {
            sum = sum + b.clone();
        }
    }
    sum * T::from_ratio(1, 2)
}

/// `Σ_{r=1..R} 2^-r · TV_r` with tail `2^-R`.
pub fn d_s<T: Scalar>(a: &StatVector<T>, b: &StatVector<T>) -> Result<Distance<T>, StatsError> {
    if a.radius() != b.radius() {
        return Err(StatsError::RadiusMismatch(a.radius(), b.radius()));
    }
    let mut value = T::zero();
    let mut weight = T::one();
    let half = T::from_ratio(1, 2);
    for (pa, pb) in a.layers.iter().zip(&b.layers) {
        weight = weight * half.clone();
        value = value + weight.clone() * total_variation(pa, pb);
    }
    Ok(Distance { value, tail: weight })
}

/// Pointwise convex combination of statistic vectors.
pub fn mixture<T: Scalar>(parts: &[(T, &StatVector<T>)]) -> Result<StatVector<T>, StatsError> {
    let (_, first) = parts.first().ok_or(StatsError::EmptyMixture)?;
    let radius = first.radius();
    if let Some((_, s)) = parts.iter().find(|(_, s)| s.radius() != radius) {
        return Err(StatsError::RadiusMismatch(radius, s.radius()));
    }
    if parts.iter().any(|(w, _)| *w < T::zero()) {
        return Err(StatsError::NegativeWeight);
    }
    let total = parts.iter().fold(T::zero(), |a, (w, _)| a + w.clone());
    let normalized = if T::EXACT { total == T::one() } else { (total.to_f64() - 1.0).abs() <= 1e-9 };
    if !normalized {
        return Err(StatsError::WeightSumNotOne);
    }
    let mut layers = vec![BTreeMap::<BallCode, T>::new(); radius];
    for (w, s) in parts {
        if w.is_zero() {
            continue;
        }
        for (out, layer) in layers.iter_mut().zip(&s.layers) {
            for (code, p) in layer {
                let slot = out.entry(code.clone()).or_insert_with(T::zero);
                *slot = slot.clone() + w.clone() * p.clone();
            }
        }
    }
    let layers = layers.into_iter().map(|l| l.into_iter().filter(|(_, v)| !v.is_zero()).collect()).collect();
    Ok(StatVector { layers, origin_n: None })
}

/// Number of subgraphs of `g` isomorphic to the connected pattern `f`
/// (not necessarily induced), for patterns of at most `cap` vertices.
pub fn subgraph_count(f: &Graph, g: &Graph, cap: usize) -> Result<u64, StatsError> {
    if f.n() > cap {
        return Err(StatsError::PatternTooLarge { size: f.n(), cap });
    }
    if f.n() == 0 || !f.is_connected() {
        return Err(StatsError::PatternDisconnected);
    }
    let embeddings = count_embeddings(f, g);
    let automorphisms = count_embeddings(f, f);
    debug_assert_eq!(embeddings % automorphisms, 0);
    Ok(embeddings / automorphisms)
}

/// Sparse density: subgraph count of `f` in `g` divided by `|V(g)|`.
pub fn sparse_density<T: Scalar>(f: &Graph, g: &Graph, cap: usize) -> Result<T, StatsError> {
    if g.n() == 0 {
        return Err(StatsError::EmptyGraph);
    }
    let count = subgraph_count(f, g, cap)?;
    Ok(T::from_ratio(count as i64, g.n() as i64))
}

pub const DEFAULT_PATTERN_CAP: usize = 6;

/// Edge-preserving injections of the connected pattern `f` into `g`.
fn count_embeddings(f: &Graph, g: &Graph) -> u64 {
    // Place pattern vertices in BFS order so each one after the first has a
    // placed neighbor to anchor candidate images.
    let order = f.ball_vertices(0, f.n());
    let mut position = vec![usize::MAX; f.n()];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let anchors: Vec<Option<usize>> = order
        .iter()
        .map(|&v| f.neighbors(v).iter().copied().filter(|&w| position[w] < position[v]).min_by_key(|&w| position[w]))
        .collect();
    let mut image = vec![usize::MAX; f.n()];
    let mut used = vec![false; g.n()];

    fn extend(
        depth: usize,
        f: &Graph,
        g: &Graph,
        order: &[usize],
        anchors: &[Option<usize>],
        position: &[usize],
        image: &mut [usize],
        used: &mut [bool],
    ) -> u64 {
        if depth == order.len() {
            return 1;
        }
        let v = order[depth];
        let candidates: Vec<usize> = match anchors[depth] {
            Some(a) => g.neighbors(image[a]).to_vec(),
            None => (0..g.n()).collect(),
        };
        let mut total = 0;
        for c in candidates {
            if used[c] || g.degree(c) < f.degree(v) {
                continue;
            }
            let fits = f
                .neighbors(v)
                .iter()
                .filter(|&&w| position[w] < depth)
                .all(|&w| g.has_edge(image[w], c));
            if !fits {
                continue;
            }
            image[v] = c;
            used[c] = true;
            total += extend(depth + 1, f, g, order, anchors, position, image, used);
            used[c] = false;
        }
        total
    }

    extend(0, f, g, &order, &anchors, &position, &mut image, &mut used)
}

/// Fraction of vertices whose radius-`r` code differs between two graphs on
/// the same vertex set.
pub fn changed_fraction<T: Scalar>(g: &Graph, h: &Graph, r: usize) -> T {
    assert_eq!(g.n(), h.n(), "graphs must share the vertex set");
    let a = vertex_codes(g, r, Decorations::plain());
    let b = vertex_codes(h, r, Decorations::plain());
    let changed = a.iter().zip(&b).filter(|(x, y)| x != y).count();
    T::from_ratio(changed as i64, g.n() as i64)
}

/// `min(1, 4 · d^r · k / n)`: bound on the fraction of radius-`r` codes that
/// change when `k` edges are added or removed in a graph of degree bound `d`.
pub fn stability_bound<T: Scalar>(d: usize, k: usize, n: usize, r: usize) -> T {
    let dr = (d as i64).checked_pow(r as u32);
    match dr.and_then(|dr| dr.checked_mul(4 * k as i64)) {
        Some(num) if num < n as i64 => T::from_ratio(num, n as i64),
        _ => T::one(),
    }
}

/// `Σ_{r=1..R} 2^-r · min(1, 4 d^r k / n) + 2^-R`: bound on `d_s` plus tail
/// after editing `k` edges.
pub fn d_s_stability_bound<T: Scalar>(d: usize, k: usize, n: usize, max_radius: usize) -> T {
    let mut total = T::zero();
    for r in 1..=max_radius {
        total = total + T::half_pow(r as u32) * stability_bound::<T>(d, k, n, r);
    }
    total + T::half_pow(max_radius as u32)
}

/// Outcome of sampling convex combinations over a set of statistic vectors.
#[derive(Debug, Clone)]
pub struct ConvexityReport<T> {
    pub samples: usize,
    /// `d(Σ λ_i v_i, w) ≤ Σ λ_i d(v_i, w)` held for every sample.
    pub combination_holds: bool,
    /// Sampled hull points were within `3 · diam(T)` of each other.
    pub hull_holds: bool,
    pub diameter: T,
    pub max_combination_ratio: f64,
    pub max_hull_ratio: f64,
    pub max_hull_distance: T,
}

/// Checks the convexity inequalities of the weighted distance on `samples`
/// random convex combinations of `set`, against the reference point `w`.
pub fn convexity_check<T: Scalar>(
    set: &[StatVector<T>],
    w: &StatVector<T>,
    samples: usize,
    seed: u64,
) -> Result<ConvexityReport<T>, StatsError> {
    if set.is_empty() {
        return Err(StatsError::EmptyMixture);
    }
    let mut diameter = T::zero();
    for a in set {
        for b in set {
            diameter = max_of(diameter, d_s(a, b)?.value);
        }
    }
    let to_w: Vec<T> = set.iter().map(|v| d_s(v, w).map(|d| d.value)).collect::<Result<_, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConvexityReport {
        samples,
        combination_holds: true,
        hull_holds: true,
        diameter: diameter.clone(),
        max_combination_ratio: 0.0,
        max_hull_ratio: 0.0,
        max_hull_distance: T::zero(),
    };
    let three_diam = T::from_int(3) * diameter;
    for _ in 0..samples {
        let lambda = random_simplex_point::<T>(&mut rng, set.len());
        let parts: Vec<(T, &StatVector<T>)> = lambda.iter().cloned().zip(set.iter()).collect();
        let p = mixture(&parts)?;
        let lhs = d_s(&p, w)?.value;
        let rhs = lambda.iter().zip(&to_w).fold(T::zero(), |acc, (l, d)| acc + l.clone() * d.clone());
        report.combination_holds &= lhs <= rhs;
        report.max_combination_ratio = report.max_combination_ratio.max(ratio(&lhs, &rhs));

        let mu = random_simplex_point::<T>(&mut rng, set.len());
        let parts: Vec<(T, &StatVector<T>)> = mu.iter().cloned().zip(set.iter()).collect();
        let q = mixture(&parts)?;
        let hull = d_s(&p, &q)?.value;
        report.hull_holds &= hull <= three_diam;
        report.max_hull_ratio = report.max_hull_ratio.max(ratio(&hull, &report.diameter));
        report.max_hull_distance = max_of(report.max_hull_distance.clone(), hull);
    }
    Ok(report)
}

fn ratio<T: Scalar>(num: &T, den: &T) -> f64 {
    if num.is_zero() {
        0.0
    } else if den.is_zero() {
        f64::INFINITY
    } else {
        num.to_f64() / den.to_f64()
    }
}

/// Random point of the probability simplex with small-denominator rational
/// coordinates, some of them zero.
fn random_simplex_point<T: Scalar>(rng: &mut ChaCha8Rng, k: usize) -> Vec<T> {
    loop {
        let raw: Vec<i64> = (0..k).map(|_| if rng.gen_bool(0.2) { 0 } else { rng.gen_range(1..=16) }).collect();
        let total: i64 = raw.iter().sum();
        if total > 0 {
            return raw.into_iter().map(|x| T::from_ratio(x, total)).collect();
        }
    }
}
