//! Testing (ε, λ, δ)-quasihomogeneity.
//!
//! A graph `G` on `n` vertices is (ε, λ, δ)-quasihomogeneous when every
//! spanned subgraph `G[S]` with `|S| ≥ λn` and at most `εn` edges leaving `S`
//! satisfies `d_s(G, G[S]) ≤ δ`. Statistics are compared at a finite radius
//! `R`, so a subset only certifies a violation when the truncated distance
//! exceeds `δ` by more than the tail `2^-R`.
//!
//! [`check_exact`] enumerates all subsets of small graphs. [`falsify_heuristic`]
//! searches larger graphs for violations and can only ever refute.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::{canonical_code, extract_ball_within, vertex_codes, BallCode, Decorations};
use crate::graph::{boundary_edge_count, connected_components, spanned_subgraph, Graph, VertexSubset};
use crate::scalar::Scalar;
use crate::stats::{d_s, stat_vector, Distance, StatsError};

/// Largest host for which [`check_exact`] enumerates subsets by default.
pub const DEFAULT_EXACT_CAP: usize = 20;

/// Independent annealing chains used by [`falsify_heuristic`]. Fixed so the
/// result depends only on the seed, not on the thread pool size.
pub const HEURISTIC_CHAINS: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuasihomError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("graph has {n} vertices, exhaustive search is capped at {cap}")]
    TooLargeForExact { n: usize, cap: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasihomParams<T> {
    pub epsilon: T,
    pub lambda: T,
    pub delta: T,
    pub radius: usize,
}

impl<T: Scalar> QuasihomParams<T> {
    pub fn new(epsilon: T, lambda: T, delta: T, radius: usize) -> Result<Self, QuasihomError> {
        let p = QuasihomParams { epsilon, lambda, delta, radius };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), QuasihomError> {
        let bad = |m: &str| Err(QuasihomError::InvalidParams(m.to_string()));
        if !(self.lambda > T::zero() && self.lambda < T::one()) {
            return bad("lambda must lie strictly between 0 and 1");
        }
        if self.epsilon <= T::zero() || self.delta <= T::zero() {
            return bad("epsilon and delta must be positive");
        }
        if self.epsilon >= self.delta {
            return bad("epsilon must be smaller than delta");
        }
        if self.radius == 0 {
            return bad("radius must be at least 1");
        }
        Ok(())
    }

    /// Smallest subset size with `size ≥ λn`.
    pub fn min_size(&self, n: usize) -> usize {
        let target = self.lambda.clone() * T::from_int(n as i64);
        (0..=n).find(|&s| T::from_int(s as i64) >= target).unwrap_or(n + 1)
    }

    /// Largest boundary count with `b ≤ εn`.
    pub fn max_boundary(&self, n: usize) -> usize {
        let budget = self.epsilon.clone() * T::from_int(n as i64);
        let mut b = 0usize;
        while T::from_int(b as i64 + 1) <= budget {
            b += 1;
        }
        b
    }

    /// `f64` copy for reporting.
    pub fn to_f64(&self) -> QuasihomParams<f64> {
        QuasihomParams {
            epsilon: self.epsilon.to_f64(),
            lambda: self.lambda.to_f64(),
            delta: self.delta.to_f64(),
            radius: self.radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    /// Exhaustive search found no subset exceeding `δ`.
    Holds,
    /// Heuristic search ran out of budget without a certified violation.
    NoViolationFound,
    Violated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessStats<T> {
    pub size: usize,
    pub fraction: T,
    pub boundary: usize,
    /// `None` only for the empty subset.
    pub distance: Option<Distance<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasihomVerdict<T> {
    pub status: VerdictStatus,
    /// For `Violated`: whether `value − tail > δ`. An uncertified violation
    /// exceeds `δ` only within the tail.
    pub certified: bool,
    pub exhaustive: bool,
    pub witness: Option<VertexSubset>,
    pub witness_stats: Option<WitnessStats<T>>,
    /// Largest-distance qualifying subset seen, when not violated.
    pub best: Option<(VertexSubset, WitnessStats<T>)>,
    /// Subsets (exact) or search moves (heuristic) evaluated.
    pub evaluated: u64,
}

impl<T> QuasihomVerdict<T> {
    pub fn is_violated(&self) -> bool {
        self.status == VerdictStatus::Violated
    }

    pub fn is_certified_violation(&self) -> bool {
        self.is_violated() && self.certified
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck<T> {
    pub size_ok: bool,
    pub boundary_ok: bool,
    /// `value > δ`.
    pub exceeds: bool,
    /// `value − tail > δ`.
    pub certified: bool,
    pub stats: WitnessStats<T>,
}

impl<T> CertificateCheck<T> {
    /// All three defining conditions hold with a certified margin.
    pub fn is_valid(&self) -> bool {
        self.size_ok && self.boundary_ok && self.certified
    }
}

/// Re-evaluates a claimed violation from scratch through [`stat_vector`].
pub fn verify_certificate<T: Scalar>(
    g: &Graph,
    subset: &VertexSubset,
    p: &QuasihomParams<T>,
) -> Result<CertificateCheck<T>, QuasihomError> {
    p.validate()?;
    let n = g.n();
    let size = subset.len();
    let boundary = boundary_edge_count(g, subset);
    let fraction = if n == 0 { T::zero() } else { T::from_ratio(size as i64, n as i64) };
    let size_ok = size > 0 && fraction >= p.lambda;
    let boundary_ok = T::from_int(boundary as i64) <= p.epsilon.clone() * T::from_int(n as i64);
    let distance = if size == 0 {
        None
    } else {
        let whole = stat_vector::<T>(g, p.radius, Decorations::plain())?;
        let part = stat_vector::<T>(&spanned_subgraph(g, subset).graph, p.radius, Decorations::plain())?;
        Some(d_s(&whole, &part)?)
    };
    let (exceeds, certified) = match &distance {
        Some(d) => (d.value > p.delta, d.value.clone() - d.tail.clone() > p.delta),
        None => (false, false),
    };
    Ok(CertificateCheck {
        size_ok,
        boundary_ok,
        exceeds,
        certified,
        stats: WitnessStats { size, fraction, boundary, distance },
    })
}

/// [`check_exact_with_cap`] with [`DEFAULT_EXACT_CAP`].
pub fn check_exact<T: Scalar>(g: &Graph, p: &QuasihomParams<T>) -> Result<QuasihomVerdict<T>, QuasihomError> {
    check_exact_with_cap(g, p, DEFAULT_EXACT_CAP)
}

/// Evaluates every subset `S` with `|S| ≥ λn` and boundary `≤ εn`, in
/// ascending bit-mask order (bit `v` = vertex `v`). Returns the first
/// certified violation; failing that, the first uncertified one; otherwise
/// `Holds`.
pub fn check_exact_with_cap<T: Scalar>(
    g: &Graph,
    p: &QuasihomParams<T>,
    cap: usize,
) -> Result<QuasihomVerdict<T>, QuasihomError> {
    p.validate()?;
    let n = g.n();
    if n > cap.min(63) {
        return Err(QuasihomError::TooLargeForExact { n, cap: cap.min(63) });
    }
    if n == 0 {
        return Err(StatsError::EmptyGraph.into());
    }
    let min_size = p.min_size(n);
    let max_boundary = p.max_boundary(n);
    let nbr: Vec<u64> = (0..n).map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | 1 << w)).collect();
    let scorer = SubsetScorer::new(g, p.radius);

    const CHUNK: u64 = 1 << 12;
    let total: u64 = 1 << n;
    let chunks = total.div_ceil(CHUNK);
    let found = (0..chunks)
        .into_par_iter()
        .map_init(
            || scorer.clone(),
            |sc, chunk| {
                let mut acc = ExactAcc::default();
                let mut member = vec![false; n];
                for mask in chunk * CHUNK..((chunk + 1) * CHUNK).min(total) {
                    if (mask.count_ones() as usize) < min_size {
                        continue;
                    }
                    let mut boundary = 0usize;
                    let mut rest = mask;
                    while rest != 0 {
                        let v = rest.trailing_zeros() as usize;
                        rest &= rest - 1;
                        boundary += (nbr[v] & !mask).count_ones() as usize;
                    }
                    if boundary > max_boundary {
                        continue;
                    }
                    for (v, m) in member.iter_mut().enumerate() {
                        *m = mask >> v & 1 == 1;
                    }
                    acc.evaluated += 1;
                    let nums = sc.numerators_of(&member);
                    let dist: Distance<T> = sc.distance(&nums, mask.count_ones() as usize);
                    let certified = dist.value.clone() - dist.tail.clone() > p.delta;
                    if certified && acc.certified.is_none() {
                        acc.certified = Some((mask, boundary, dist.clone()));
                    } else if dist.value > p.delta && acc.uncertified.is_none() {
                        acc.uncertified = Some((mask, boundary, dist.clone()));
                    }
                    if acc.best.as_ref().map_or(true, |(_, _, b)| dist.value > b.value) {
                        acc.best = Some((mask, boundary, dist));
                    }
                }
                acc
            },
        )
        .reduce(ExactAcc::default, ExactAcc::merge);

    let stats_of = |mask: u64, boundary: usize, dist: Distance<T>| {
        let size = mask.count_ones() as usize;
        WitnessStats { size, fraction: T::from_ratio(size as i64, n as i64), boundary, distance: Some(dist) }
    };
    let violation = found.certified.clone().map(|w| (w, true)).or(found.uncertified.clone().map(|w| (w, false)));
    Ok(match violation {
        Some(((mask, boundary, dist), certified)) => QuasihomVerdict {
            status: VerdictStatus::Violated,
            certified,
            exhaustive: true,
            witness: Some(VertexSubset::from_bits(mask, n)),
            witness_stats: Some(stats_of(mask, boundary, dist)),
            best: None,
            evaluated: found.evaluated,
        },
        None => QuasihomVerdict {
            status: VerdictStatus::Holds,
            certified: false,
            exhaustive: true,
            witness: None,
            witness_stats: None,
            best: found.best.map(|(m, b, d)| (VertexSubset::from_bits(m, n), stats_of(m, b, d))),
            evaluated: found.evaluated,
        },
    })
}

type MaskHit<T> = (u64, usize, Distance<T>);

struct ExactAcc<T> {
    certified: Option<MaskHit<T>>,
    uncertified: Option<MaskHit<T>>,
    best: Option<MaskHit<T>>,
    evaluated: u64,
}

impl<T> Default for ExactAcc<T> {
    fn default() -> Self {
        ExactAcc { certified: None, uncertified: None, best: None, evaluated: 0 }
    }
}

impl<T: Scalar> ExactAcc<T> {
    fn merge(a: Self, b: Self) -> Self {
        fn lowest<T>(x: Option<MaskHit<T>>, y: Option<MaskHit<T>>) -> Option<MaskHit<T>> {
            match (x, y) {
                (Some(x), Some(y)) => Some(if x.0 <= y.0 { x } else { y }),
                (x, y) => x.or(y),
            }
        }
        let best = match (a.best, b.best) {
            (Some(x), Some(y)) => {
                let take_y = y.2.value > x.2.value || (y.2.value == x.2.value && y.0 < x.0);
                Some(if take_y { y } else { x })
            }
            (x, y) => x.or(y),
        };
        ExactAcc {
            certified: lowest(a.certified, b.certified),
            uncertified: lowest(a.uncertified, b.uncertified),
            best,
            evaluated: a.evaluated + b.evaluated,
        }
    }
}

/// Randomized search for a certified violation.
///
/// Runs [`HEURISTIC_CHAINS`] independent chains (in parallel) that share the
/// move budget. Each chain evaluates its share of the starting subsets —
/// connected components and their unions, vertex classes with equal ball
/// codes, BFS-grown regions — and then anneals single-vertex flips along the
/// boundary, preferring feasible subsets and, among those, larger `d_s`.
/// Every reported violation is certified and re-checked exactly.
pub fn falsify_heuristic<T: Scalar>(
    g: &Graph,
    p: &QuasihomParams<T>,
    budget: u64,
    seed: u64,
) -> Result<QuasihomVerdict<T>, QuasihomError> {
    p.validate()?;
    let n = g.n();
    let mut verdict = QuasihomVerdict {
        status: VerdictStatus::NoViolationFound,
        certified: false,
        exhaustive: false,
        witness: None,
        witness_stats: None,
        best: None,
        evaluated: 0,
    };
    if budget == 0 || n == 0 {
        return Ok(verdict);
    }
    let scorer = SubsetScorer::new(g, p.radius);
    let ctx = SearchContext {
        g,
        scorer: &scorer,
        min_size: p.min_size(n),
        max_boundary: p.max_boundary(n),
        delta: p.delta.to_f64(),
        p,
    };
    let starts = ctx.starting_subsets(seed);
    let chains = HEURISTIC_CHAINS.min(budget as usize);
    let results: Vec<ChainResult<T>> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let share = budget / chains as u64 + u64::from((c as u64) < budget % chains as u64);
            let mine: Vec<&Vec<bool>> = starts.iter().skip(c).step_by(chains).collect();
            let rng = ChaCha8Rng::seed_from_u64(seed ^ (c as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            ctx.run_chain(scorer.clone(), &mine, share, rng)
        })
        .collect();

    let mut best: Option<Candidate<T>> = None;
    for r in results {
        verdict.evaluated += r.evaluated;
        if verdict.witness.is_none() {
            if let Some(w) = r.violation {
                let check = verify_certificate(g, &w, p)?;
                debug_assert!(check.is_valid());
                if check.is_valid() {
                    verdict.status = VerdictStatus::Violated;
                    verdict.certified = true;
                    verdict.witness = Some(w);
                    verdict.witness_stats = Some(check.stats);
                }
            }
        }
        if let Some(c) = r.best {
            if best.as_ref().map_or(true, |b| c.beats(b)) {
                best = Some(c);
            }
        }
    }
    if !verdict.is_violated() {
        verdict.best = best.map(|c| (c.subset, c.stats));
    }
    Ok(verdict)
}

struct Candidate<T> {
    subset: VertexSubset,
    stats: WitnessStats<T>,
}

impl<T: Scalar> Candidate<T> {
    /// Larger distance first; ties prefer smaller boundary, then the
    /// lexicographically smaller vertex list.
    fn beats(&self, other: &Candidate<T>) -> bool {
        let v = |c: &Candidate<T>| c.stats.distance.as_ref().map(|d| d.value.clone()).unwrap_or_else(T::zero);
        let (a, b) = (v(self), v(other));
        if a != b {
            return a > b;
        }
        if self.stats.boundary != other.stats.boundary {
            return self.stats.boundary < other.stats.boundary;
        }
        self.subset.ids() < other.subset.ids()
    }
}

struct ChainResult<T> {
    violation: Option<VertexSubset>,
    best: Option<Candidate<T>>,
    evaluated: u64,
}

struct SearchContext<'a, T> {
    g: &'a Graph,
    scorer: &'a SubsetScorer<'a>,
    min_size: usize,
    max_boundary: usize,
    delta: f64,
    p: &'a QuasihomParams<T>,
}

impl<T: Scalar> SearchContext<'_, T> {
    fn starting_subsets(&self, seed: u64) -> Vec<Vec<bool>> {
        let n = self.g.n();
        let mut out: Vec<Vec<bool>> = Vec::new();
        let push = |m: Vec<bool>, out: &mut Vec<Vec<bool>>| {
            if m.iter().any(|&b| b) && !out.contains(&m) {
                out.push(m);
            }
        };

        let comps = connected_components(self.g);
        if comps.len() > 1 {
            let masks: Vec<Vec<bool>> = comps.iter().map(|c| c.mask()).collect();
            let union = |bits: u64| -> Vec<bool> {
                (0..n).map(|v| masks.iter().enumerate().any(|(i, m)| bits >> i & 1 == 1 && m[v])).collect()
            };
            if comps.len() <= 8 {
                for bits in 1..(1u64 << comps.len()) - 1 {
                    push(union(bits), &mut out);
                }
            } else {
                for m in &masks {
                    push(m.clone(), &mut out);
                    push(m.iter().map(|b| !b).collect(), &mut out);
                }
            }
        }

        for r in 1..=self.scorer.radius {
            let mut classes: HashMap<u32, Vec<usize>> = HashMap::new();
            for (v, &c) in self.scorer.full[r - 1].iter().enumerate() {
                classes.entry(c).or_default().push(v);
            }
            let mut classes: Vec<Vec<usize>> = classes.into_values().collect();
            classes.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
            classes.truncate(32);
            let mut acc = vec![false; n];
            for class in &classes {
                let mut own = vec![false; n];
                for &v in class {
                    own[v] = true;
                    acc[v] = true;
                }
                let mut closed = own.clone();
                for &v in class {
                    for &w in self.g.neighbors(v) {
                        closed[w] = true;
                    }
                }
                push(own.clone(), &mut out);
                push(closed, &mut out);
                push(own.iter().map(|b| !b).collect(), &mut out);
                push(acc.clone(), &mut out);
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..16 {
            let target = rng.gen_range(self.min_size.min(n)..=n);
            push(self.bfs_region(rng.gen_range(0..n), target), &mut out);
        }
        out
    }

    /// BFS from `root`, jumping to the next unvisited vertex when a
    /// component runs out, until `target` vertices are taken.
    fn bfs_region(&self, root: usize, target: usize) -> Vec<bool> {
        let n = self.g.n();
        let mut taken = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        let mut count = 0;
        let mut next_root = (0..n).map(|i| (root + i) % n);
        while count < target {
            let s = match queue.pop_front() {
                Some(s) => s,
                None => match next_root.find(|&v| !taken[v]) {
                    Some(v) => {
                        taken[v] = true;
                        count += 1;
                        v
                    }
                    None => break,
                },
            };
            for &w in self.g.neighbors(s) {
                if count < target && !taken[w] {
                    taken[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        taken
    }

    fn objective(&self, st: &SubsetState) -> f64 {
        let n = self.g.n() as f64;
        let deficit = self.min_size.saturating_sub(st.size) as f64;
        let excess = st.boundary.saturating_sub(self.max_boundary) as f64;
        if deficit > 0.0 || excess > 0.0 || st.size == 0 {
            -(deficit + excess + 1.0) / n
        } else {
            1.0 + self.scorer.value_f64(&st.numerators(self.scorer), st.size)
        }
    }

    fn feasible(&self, st: &SubsetState) -> bool {
        st.size >= self.min_size && st.size > 0 && st.boundary <= self.max_boundary
    }

    /// Exact check of the current state; true when certified.
    fn certify(&self, scorer: &SubsetScorer<'_>, st: &SubsetState) -> bool {
        let dist: Distance<T> = scorer.distance(&st.numerators(scorer), st.size);
        dist.value - dist.tail > self.p.delta
    }

    fn candidate(&self, scorer: &SubsetScorer<'_>, st: &SubsetState) -> Candidate<T> {
        let n = self.g.n();
        Candidate {
            subset: VertexSubset::from_mask(&st.member),
            stats: WitnessStats {
                size: st.size,
                fraction: T::from_ratio(st.size as i64, n as i64),
                boundary: st.boundary,
                distance: Some(scorer.distance(&st.numerators(scorer), st.size)),
            },
        }
    }

    fn run_chain(
        &self,
        mut scorer: SubsetScorer<'_>,
        starts: &[&Vec<bool>],
        budget: u64,
        mut rng: ChaCha8Rng,
    ) -> ChainResult<T> {
        let n = self.g.n();
        let tail = 0.5f64.powi(self.p.radius as i32);
        let mut used = 0u64;
        let mut best: Option<Candidate<T>> = None;
        let mut pool: Vec<(f64, Vec<bool>)> = Vec::new();
        let mut found = None;

        let consider = |scorer: &mut SubsetScorer<'_>, st: &SubsetState, obj: f64, best: &mut Option<Candidate<T>>| {
            if !self.feasible(st) {
                return false;
            }
            if obj - 1.0 - tail > self.delta - 1e-9 && self.certify(scorer, st) {
                return true;
            }
            if best.as_ref().map_or(true, |b| {
                let bv = b.stats.distance.as_ref().map_or(0.0, |d| d.value.to_f64());
                obj - 1.0 > bv + 1e-12
            }) {
                *best = Some(self.candidate(scorer, st));
            }
            false
        };

        // Evaluate this chain's starting subsets.
        for &m in starts {
            if used >= budget {
                break;
            }
            used += 1;
            let st = SubsetState::new(&mut scorer, m.clone());
            let obj = self.objective(&st);
            if consider(&mut scorer, &st, obj, &mut best) {
                found = Some(VertexSubset::from_mask(&st.member));
                break;
            }
            pool.push((obj, st.member));
        }
        pool.sort_by(|a, b| b.0.total_cmp(&a.0));

        let sweep = ((budget / 8).clamp(64, 4000)).max(1);
        let mut restart = 0usize;
        while found.is_none() && used < budget {
            let start = if pool.is_empty() || restart % 3 == 2 {
                let target = rng.gen_range(self.min_size.min(n)..=n);
                self.bfs_region(rng.gen_range(0..n), target)
            } else {
                pool[(restart / 3 * 2 + restart % 3) % pool.len()].1.clone()
            };
            restart += 1;
            let mut st = SubsetState::new(&mut scorer, start);
            let mut obj = self.objective(&st);
            let steps = sweep.min(budget - used);
            for step in 0..steps {
                used += 1;
                let temp = 0.02 * (0.0005f64 / 0.02).powf(step as f64 / steps as f64);
                let v = self.pick_flip(&st, &mut rng);
                st.flip(&mut scorer, self.g, v);
                let new_obj = self.objective(&st);
                let accept = new_obj >= obj || rng.gen::<f64>() < ((new_obj - obj) / temp).exp();
                if !accept {
                    st.flip(&mut scorer, self.g, v);
                    continue;
                }
                obj = new_obj;
                if consider(&mut scorer, &st, obj, &mut best) {
                    found = Some(VertexSubset::from_mask(&st.member));
                    break;
                }
            }
        }
        ChainResult { violation: found, best, evaluated: used }
    }

    /// Mostly a vertex on the boundary of the current subset; occasionally
    /// any vertex, so closed regions (components) can still change.
    fn pick_flip(&self, st: &SubsetState, rng: &mut ChaCha8Rng) -> usize {
        let n = self.g.n();
        if rng.gen::<f64>() < 0.85 {
            for _ in 0..8 {
                let u = rng.gen_range(0..n);
                if let Some(&w) = self.g.neighbors(u).choose(rng) {
                    if st.member[u] != st.member[w] {
                        return if rng.gen() { u } else { w };
                    }
                }
            }
        }
        rng.gen_range(0..n)
    }
}

/// Ball codes of `G[S]` for many subsets `S` of one host `G`.
///
/// The radius-`r` ball of `u` in `G[S]` depends only on `S ∩ B_r^G(u)`, so
/// codes are memoized per (vertex, radius, membership mask of that ball) and
/// interned per radius. Distances are kept as integer numerators: at radius
/// `r`, `TV_r = Σ_α |c_G(α)·m − c_S(α)·n| / (2nm)` for `|S| = m`.
#[derive(Clone)]
pub(crate) struct SubsetScorer<'g> {
    g: &'g Graph,
    radius: usize,
    /// `balls[r-1][u]`: host vertices within distance `r` of `u`, BFS order.
    balls: Vec<Vec<Vec<usize>>>,
    interners: Vec<HashMap<BallCode, u32>>,
    /// `full[r-1][u]`: interned code of `u` in `G`.
    full: Vec<Vec<u32>>,
    /// `g_counts[r-1][id]`, dense over ids present in `G`.
    g_counts: Vec<Vec<i64>>,
    memo: HashMap<(u32, u8, u128), u32>,
}

impl<'g> SubsetScorer<'g> {
    pub(crate) fn new(g: &'g Graph, radius: usize) -> Self {
        let mut interners = Vec::with_capacity(radius);
        let mut full = Vec::with_capacity(radius);
        let mut g_counts = Vec::with_capacity(radius);
        let mut balls = Vec::with_capacity(radius);
        for r in 1..=radius {
            let mut table: HashMap<BallCode, u32> = HashMap::new();
            let mut counts = Vec::new();
            let ids: Vec<u32> = vertex_codes(g, r, Decorations::plain())
                .into_iter()
                .map(|c| {
                    let next = table.len() as u32;
                    let id = *table.entry(c).or_insert(next);
                    if id as usize == counts.len() {
                        counts.push(0);
                    }
                    counts[id as usize] += 1;
                    id
                })
                .collect();
            interners.push(table);
            full.push(ids);
            g_counts.push(counts);
            balls.push((0..g.n()).map(|u| g.ball_vertices(u, r)).collect());
        }
        SubsetScorer { g, radius, balls, interners, full, g_counts, memo: HashMap::new() }
    }

    fn intern(&mut self, r: usize, code: BallCode) -> u32 {
        let table = &mut self.interners[r - 1];
        let next = table.len() as u32;
        *table.entry(code).or_insert(next)
    }

    /// Code id of member `u`'s radius-`r` ball in `G[S]`.
    fn code_in(&mut self, u: usize, r: usize, member: &[bool]) -> u32 {
        let ball = &self.balls[r - 1][u];
        let inside = ball.iter().filter(|&&w| member[w]).count();
        if inside == ball.len() {
            return self.full[r - 1][u];
        }
        let key = if ball.len() <= 128 {
            let mask = ball.iter().enumerate().fold(0u128, |m, (i, &w)| if member[w] { m | 1 << i } else { m });
            let key = (u as u32, r as u8, mask);
            if let Some(&id) = self.memo.get(&key) {
                return id;
            }
            Some(key)
        } else {
            None
        };
        let code = canonical_code(&extract_ball_within(self.g, u, r, Decorations::plain(), |w| member[w]));
        let id = self.intern(r, code);
        if let Some(key) = key {
            self.memo.insert(key, id);
        }
        id
    }

    /// Per-radius `Σ_α |c_G·m − c_S·n|` over all codes.
    fn numerators_from_counts(&self, counts: &[HashMap<u32, i64>], m: usize) -> Vec<i64> {
        let (n, m) = (self.g.n() as i64, m as i64);
        counts
            .iter()
            .enumerate()
            .map(|(ri, cs)| {
                let g = &self.g_counts[ri];
                let mut total = n * m;
                for (&id, &s) in cs {
                    let gc = g.get(id as usize).copied().unwrap_or(0);
                    total += (gc * m - s * n).abs() - gc * m;
                }
                total
            })
            .collect()
    }

    pub(crate) fn numerators_of(&mut self, member: &[bool]) -> Vec<i64> {
        let mut counts = vec![HashMap::new(); self.radius];
        let mut m = 0;
        for u in 0..member.len() {
            if member[u] {
                m += 1;
                for r in 1..=self.radius {
                    *counts[r - 1].entry(self.code_in(u, r, member)).or_insert(0) += 1;
                }
            }
        }
        self.numerators_from_counts(&counts, m)
    }

    pub(crate) fn distance<T: Scalar>(&self, nums: &[i64], m: usize) -> Distance<T> {
        let den = 2 * self.g.n() as i64 * m as i64;
        let mut value = T::zero();
        let mut weight = T::one();
        for &num in nums {
            weight = weight * T::from_ratio(1, 2);
            value = value + weight.clone() * T::from_ratio(num, den);
        }
        Distance { value, tail: weight }
    }

    fn value_f64(&self, nums: &[i64], m: usize) -> f64 {
        let den = 2.0 * self.g.n() as f64 * m as f64;
        nums.iter().enumerate().map(|(i, &num)| 0.5f64.powi(i as i32 + 1) * num as f64 / den).sum()
    }
}

/// A subset with its boundary and per-radius code counts kept current
/// under single-vertex flips.
struct SubsetState {
    member: Vec<bool>,
    size: usize,
    boundary: usize,
    /// `codes[r-1][u]` for members.
    codes: Vec<Vec<Option<u32>>>,
    counts: Vec<HashMap<u32, i64>>,
}

impl SubsetState {
    fn new(scorer: &mut SubsetScorer<'_>, member: Vec<bool>) -> Self {
        let g = scorer.g;
        let n = g.n();
        let mut st = SubsetState {
            size: member.iter().filter(|&&b| b).count(),
            boundary: (0..n).filter(|&v| member[v]).map(|v| g.neighbors(v).iter().filter(|&&w| !member[w]).count()).sum(),
            codes: vec![vec![None; n]; scorer.radius],
            counts: vec![HashMap::new(); scorer.radius],
            member,
        };
        for u in 0..n {
            if st.member[u] {
                for r in 1..=scorer.radius {
                    let id = scorer.code_in(u, r, &st.member);
                    st.codes[r - 1][u] = Some(id);
                    *st.counts[r - 1].entry(id).or_insert(0) += 1;
                }
            }
        }
        st
    }

    fn flip(&mut self, scorer: &mut SubsetScorer<'_>, g: &Graph, v: usize) {
        let inside = g.neighbors(v).iter().filter(|&&w| self.member[w]).count();
        let outside = g.degree(v) - inside;
        if self.member[v] {
            self.boundary = self.boundary + inside - outside;
            self.size -= 1;
        } else {
            self.boundary = self.boundary + outside - inside;
            self.size += 1;
        }
        self.member[v] = !self.member[v];
        for r in 1..=scorer.radius {
            // Members whose radius-r ball contains v are exactly those within distance r.
            for i in 0..scorer.balls[r - 1][v].len() {
                let u = scorer.balls[r - 1][v][i];
                if let Some(old) = self.codes[r - 1][u].take() {
                    let c = self.counts[r - 1].get_mut(&old).expect("counted code");
                    *c -= 1;
                    if *c == 0 {
                        self.counts[r - 1].remove(&old);
                    }
                }
                if self.member[u] {
                    let id = scorer.code_in(u, r, &self.member);
                    self.codes[r - 1][u] = Some(id);
                    *self.counts[r - 1].entry(id).or_insert(0) += 1;
                }
            }
        }
    }

    fn numerators(&self, scorer: &SubsetScorer<'_>) -> Vec<i64> {
        scorer.numerators_from_counts(&self.counts, self.size)
    }
}
