//! Versioned JSON documents for statistics, distances, verdicts and
//! partitions.
//!
//! Every document carries `format_version`. Rationals are written as an
//! integer pair with a decimal string for reading; only the pair is parsed
//! back.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::{BallCode, CodeError};
use crate::coloring::{EdgeColoring, VertexColoring};
use crate::decomposer::{
    CheckMode, DecomposeParams, Partition, PartitionVerdict, SplitReport, ThresholdMode,
};
use crate::generators::ConvergenceReport;
use crate::quasihom::{QuasihomParams, QuasihomVerdict, VerdictStatus, WitnessStats};
use crate::stats::{Distance, StatVector, StatsError};
use crate::{Graph, Rational, Scalar};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("format_version {found} is not supported (expected {FORMAT_VERSION})")]
    FormatVersion { found: u32 },
    #[error("rational {0} does not fit in 64-bit integers")]
    Overflow(String),
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

fn check_version(v: u32) -> Result<(), IoError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(IoError::FormatVersion { found: v })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: i64,
    pub den: i64,
    pub decimal: String,
}

impl RationalJson {
    pub fn from_rational(q: &Rational) -> Result<RationalJson, IoError> {
        let fit = |b: &BigInt| b.to_i64().ok_or_else(|| IoError::Overflow(q.to_string()));
        Ok(RationalJson { num: fit(q.numer())?, den: fit(q.denom())?, decimal: decimal_string(q, 12) })
    }

    pub fn to_rational(&self) -> Result<Rational, IoError> {
        if self.den == 0 {
            return Err(IoError::Invalid("zero denominator".into()));
        }
        Ok(Rational::from_ratio(self.num, self.den))
    }
}

/// Decimal expansion truncated toward zero after `digits` fractional digits,
/// with trailing zeros removed.
pub fn decimal_string(q: &Rational, digits: usize) -> String {
    let neg = q.is_negative();
    let q = q.abs();
    let int = q.numer() / q.denom();
    let mut rem = q.numer() % q.denom();
    let mut frac = String::new();
    for _ in 0..digits {
        if rem == BigInt::from(0) {
            break;
        }
        rem *= 10;
        frac.push_str(&(&rem / q.denom()).to_string());
        rem %= q.denom();
    }
    let frac = frac.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

fn rj(q: &Rational) -> Result<RationalJson, IoError> {
    RationalJson::from_rational(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeEntryDoc {
    pub code_hex: String,
    #[serde(flatten)]
    pub frequency: RationalJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusLayerDoc {
    pub r: usize,
    pub entries: Vec<CodeEntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatVectorDoc {
    pub format_version: u32,
    #[serde(rename = "R")]
    pub radius: usize,
    /// Vertex count of the graph the vector was computed from, if any.
    pub n: Option<usize>,
    pub radii: Vec<RadiusLayerDoc>,
}

impl StatVectorDoc {
    pub fn from_stats(s: &StatVector<Rational>) -> Result<StatVectorDoc, IoError> {
        let radii = s
            .layers()
            .iter()
            .enumerate()
            .map(|(i, layer)| {
                let entries = layer
                    .iter()
                    .map(|(c, f)| Ok(CodeEntryDoc { code_hex: c.to_hex(), frequency: rj(f)? }))
                    .collect::<Result<_, IoError>>()?;
                Ok(RadiusLayerDoc { r: i + 1, entries })
            })
            .collect::<Result<_, IoError>>()?;
        Ok(StatVectorDoc { format_version: FORMAT_VERSION, radius: s.radius(), n: s.origin_n(), radii })
    }

    pub fn to_stats(&self) -> Result<StatVector<Rational>, IoError> {
        check_version(self.format_version)?;
        if self.radii.len() != self.radius || self.radii.iter().enumerate().any(|(i, l)| l.r != i + 1) {
            return Err(IoError::Invalid(format!("expected layers r = 1..={}", self.radius)));
        }
        let layers = self
            .radii
            .iter()
            .map(|l| {
                let mut layer = BTreeMap::new();
                for e in &l.entries {
                    let code = BallCode::from_hex(&e.code_hex)?;
                    if code.radius() != l.r {
                        return Err(IoError::Invalid(format!("code of radius {} in layer {}", code.radius(), l.r)));
                    }
                    if layer.insert(code, e.frequency.to_rational()?).is_some() {
                        return Err(IoError::Invalid(format!("duplicate code {}", e.code_hex)));
                    }
                }
                Ok(layer)
            })
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(StatVector::from_layers(layers, self.n)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceValueDoc {
    pub value: RationalJson,
    pub tail: RationalJson,
}

impl DistanceValueDoc {
    pub fn from_distance(d: &Distance<Rational>) -> Result<DistanceValueDoc, IoError> {
        Ok(DistanceValueDoc { value: rj(&d.value)?, tail: rj(&d.tail)? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceDoc {
    pub format_version: u32,
    #[serde(rename = "R")]
    pub radius: usize,
    pub value: RationalJson,
    pub tail: RationalJson,
    pub upper: RationalJson,
}

impl DistanceDoc {
    pub fn new(radius: usize, d: &Distance<Rational>) -> Result<DistanceDoc, IoError> {
        Ok(DistanceDoc { format_version: FORMAT_VERSION, radius, value: rj(&d.value)?, tail: rj(&d.tail)?, upper: rj(&d.upper())? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub epsilon: RationalJson,
    pub lambda: RationalJson,
    pub delta: RationalJson,
    #[serde(rename = "R")]
    pub radius: usize,
}

impl ParamsDoc {
    pub fn new(p: &QuasihomParams<Rational>) -> Result<ParamsDoc, IoError> {
        Ok(ParamsDoc { epsilon: rj(&p.epsilon)?, lambda: rj(&p.lambda)?, delta: rj(&p.delta)?, radius: p.radius })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub size: usize,
    pub fraction: RationalJson,
    pub boundary: usize,
    pub distance: Option<DistanceValueDoc>,
}

impl WitnessDoc {
    pub fn new(w: &WitnessStats<Rational>) -> Result<WitnessDoc, IoError> {
        Ok(WitnessDoc {
            size: w.size,
            fraction: rj(&w.fraction)?,
            boundary: w.boundary,
            distance: w.distance.as_ref().map(DistanceValueDoc::from_distance).transpose()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateDoc {
    pub vertices: Vec<usize>,
    pub stats: WitnessDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub format_version: u32,
    pub status: VerdictStatus,
    pub certified: bool,
    pub exhaustive: bool,
    pub n: usize,
    pub params: ParamsDoc,
    /// Certificate vertex list when violated.
    pub witness: Option<Vec<usize>>,
    pub witness_stats: Option<WitnessDoc>,
    pub best: Option<CandidateDoc>,
    pub evaluated: u64,
}

impl VerdictDoc {
    pub fn new(n: usize, p: &QuasihomParams<Rational>, v: &QuasihomVerdict<Rational>) -> Result<VerdictDoc, IoError> {
        Ok(VerdictDoc {
            format_version: FORMAT_VERSION,
            status: v.status,
            certified: v.certified,
            exhaustive: v.exhaustive,
            n,
            params: ParamsDoc::new(p)?,
            witness: v.witness.as_ref().map(|w| w.ids().to_vec()),
            witness_stats: v.witness_stats.as_ref().map(WitnessDoc::new).transpose()?,
            best: v
                .best
                .as_ref()
                .map(|(s, w)| Ok::<_, IoError>(CandidateDoc { vertices: s.ids().to_vec(), stats: WitnessDoc::new(w)? }))
                .transpose()?,
            evaluated: v.evaluated,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeParamsDoc {
    pub delta: RationalJson,
    pub lambda: RationalJson,
    pub k_max: u32,
    pub signature_radius: usize,
    pub seed: u64,
    pub threshold_mode: ThresholdMode,
}

impl DecomposeParamsDoc {
    pub fn new(p: &DecomposeParams<Rational>) -> Result<DecomposeParamsDoc, IoError> {
        Ok(DecomposeParamsDoc {
            delta: rj(&p.delta)?,
            lambda: rj(&p.lambda)?,
            k_max: p.k_max,
            signature_radius: p.signature_radius,
            seed: p.seed,
            threshold_mode: p.threshold_mode,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartReportDoc {
    pub label: u32,
    pub size: usize,
    pub fraction: RationalJson,
    pub above_threshold: bool,
    pub quasihomogeneous: bool,
    pub verdict: VerdictDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionVerdictDoc {
    pub format_version: u32,
    pub pass: bool,
    pub mode: CheckMode,
    pub deleted: usize,
    pub edges: usize,
    pub deleted_limit: RationalJson,
    pub deleted_ok: bool,
    pub empty_size: usize,
    pub empty_edgeless: bool,
    pub empty_ok: bool,
    pub threshold: RationalJson,
    pub sizes_ok: bool,
    pub quasihomogeneous_ok: bool,
    pub parts: Vec<PartReportDoc>,
}

impl PartitionVerdictDoc {
    pub fn new(v: &PartitionVerdict<Rational>, p: &QuasihomParams<Rational>) -> Result<PartitionVerdictDoc, IoError> {
        Ok(PartitionVerdictDoc {
            format_version: FORMAT_VERSION,
            pass: v.pass,
            mode: v.mode,
            deleted: v.deleted,
            edges: v.edges,
            deleted_limit: rj(&v.deleted_limit)?,
            deleted_ok: v.deleted_ok,
            empty_size: v.empty_size,
            empty_edgeless: v.empty_edgeless,
            empty_ok: v.empty_ok,
            threshold: rj(&v.threshold)?,
            sizes_ok: v.sizes_ok,
            quasihomogeneous_ok: v.quasihomogeneous_ok,
            parts: v
                .parts
                .iter()
                .map(|r| {
                    Ok(PartReportDoc {
                        label: r.label,
                        size: r.size,
                        fraction: rj(&r.fraction)?,
                        above_threshold: r.above_threshold,
                        quasihomogeneous: r.quasihomogeneous,
                        verdict: VerdictDoc::new(r.size, p, &r.verdict)?,
                    })
                })
                .collect::<Result<_, IoError>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionDoc {
    pub format_version: u32,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: u32,
    /// Part id in `1..=K` per vertex; `null` for the empty part.
    pub assignments: Vec<Option<u32>>,
    pub deleted_edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decompose: Option<DecomposeParamsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<PartitionVerdictDoc>,
}

impl PartitionDoc {
    pub fn new(p: &Partition) -> PartitionDoc {
        PartitionDoc {
            format_version: FORMAT_VERSION,
            n: p.n,
            k: p.k,
            assignments: p.parts.clone(),
            deleted_edges: p.deleted_edges.iter().map(|&(u, v)| [u, v]).collect(),
            decompose: None,
            verdict: None,
        }
    }

    pub fn to_partition(&self) -> Result<Partition, IoError> {
        check_version(self.format_version)?;
        if self.assignments.len() != self.n {
            return Err(IoError::Invalid(format!("{} assignments for n = {}", self.assignments.len(), self.n)));
        }
        Ok(Partition {
            n: self.n,
            k: self.k,
            parts: self.assignments.clone(),
            deleted_edges: self.deleted_edges.iter().map(|&[u, v]| (u.min(v), u.max(v))).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEntryDoc {
    pub n: usize,
    pub cross_edge_ratio: RationalJson,
    /// Empty part first.
    pub part_fractions: Vec<RationalJson>,
    pub mixture_identity: bool,
    pub part_stats: Vec<Option<StatVectorDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReportDoc {
    pub format_version: u32,
    #[serde(rename = "K")]
    pub k: u32,
    #[serde(rename = "R")]
    pub radius: usize,
    pub entries: Vec<SplitEntryDoc>,
    pub cross_ratio_decreasing: bool,
    pub drift: Vec<Vec<Option<DistanceValueDoc>>>,
}

impl SplitReportDoc {
    pub fn new(r: &SplitReport<Rational>) -> Result<SplitReportDoc, IoError> {
        Ok(SplitReportDoc {
            format_version: FORMAT_VERSION,
            k: r.k,
            radius: r.radius,
            entries: r
                .entries
                .iter()
                .map(|e| {
                    Ok(SplitEntryDoc {
                        n: e.n,
                        cross_edge_ratio: rj(&e.cross_edge_ratio)?,
                        part_fractions: e.part_fractions.iter().map(rj).collect::<Result<_, _>>()?,
                        mixture_identity: e.mixture_identity,
                        part_stats: e
                            .part_stats
                            .iter()
                            .map(|s| s.as_ref().map(StatVectorDoc::from_stats).transpose())
                            .collect::<Result<_, _>>()?,
                    })
                })
                .collect::<Result<_, IoError>>()?,
            cross_ratio_decreasing: r.cross_ratio_decreasing,
            drift: r
                .drift
                .iter()
                .map(|row| row.iter().map(|d| d.as_ref().map(DistanceValueDoc::from_distance).transpose()).collect())
                .collect::<Result<_, _>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceDoc {
    pub format_version: u32,
    #[serde(rename = "R")]
    pub radius: usize,
    pub sizes: Vec<usize>,
    pub table: Vec<Vec<DistanceValueDoc>>,
    pub consecutive: Vec<RationalJson>,
    pub monotone_decreasing: bool,
}

impl ConvergenceDoc {
    pub fn new(radius: usize, r: &ConvergenceReport<Rational>) -> Result<ConvergenceDoc, IoError> {
        Ok(ConvergenceDoc {
            format_version: FORMAT_VERSION,
            radius,
            sizes: r.sizes.clone(),
            table: r
                .table
                .iter()
                .map(|row| row.iter().map(DistanceValueDoc::from_distance).collect())
                .collect::<Result<_, _>>()?,
            consecutive: r.consecutive.iter().map(rj).collect::<Result<_, _>>()?,
            monotone_decreasing: r.monotone_decreasing,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringDoc {
    pub format_version: u32,
    pub n: usize,
    pub degree_bound: usize,
    /// `d² + 1`.
    pub vertex_palette: u32,
    pub used_vertex_colors: u32,
    /// `(d² + 1 choose 2)`.
    pub edge_palette: u32,
    pub vertex_colors: Vec<u32>,
    /// `[u, v, color]` with the 1-based pair index as color.
    pub edges: Vec<[u64; 3]>,
    pub edge_coloring_proper: bool,
    pub square_coloring_proper: bool,
}

impl ColoringDoc {
    pub fn new(g: &Graph, vc: &VertexColoring, ec: &EdgeColoring) -> ColoringDoc {
        let square = crate::graph::square_graph(g);
        ColoringDoc {
            format_version: FORMAT_VERSION,
            n: g.n(),
            degree_bound: g.degree_bound(),
            vertex_palette: vc.palette,
            used_vertex_colors: vc.used_colors(),
            edge_palette: ec.edge_palette(),
            vertex_colors: vc.colors.clone(),
            edges: ec.edges.iter().zip(ec.color_indices()).map(|(&(u, v), c)| [u as u64, v as u64, c as u64]).collect(),
            edge_coloring_proper: ec.is_proper_on(g),
            square_coloring_proper: vc.is_proper_on(&square),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasEntryDoc {
    pub r: usize,
    pub code_hex: String,
    pub count: usize,
    pub frequency: RationalJson,
    pub vertices: usize,
    /// Ball edges in canonical vertex order; vertex 0 is the root.
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_colors: Option<Vec<u32>>,
}

/// Every occurring ball type with its decoded structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasDoc {
    pub format_version: u32,
    #[serde(rename = "R")]
    pub radius: usize,
    pub n: usize,
    pub entries: Vec<AtlasEntryDoc>,
}

impl AtlasDoc {
    pub fn new(s: &StatVector<Rational>) -> Result<AtlasDoc, IoError> {
        let n = s.origin_n().ok_or_else(|| IoError::Invalid("atlas needs a vector computed from a graph".into()))?;
        let mut entries = Vec::new();
        for (i, layer) in s.layers().iter().enumerate() {
            for (code, f) in layer {
                let ball = code.decode()?;
                let count = (f * Rational::from_int(n as i64)).to_integer().to_usize().unwrap_or(0);
                let edges = ball.edges();
                entries.push(AtlasEntryDoc {
                    r: i + 1,
                    code_hex: code.to_hex(),
                    count,
                    frequency: rj(f)?,
                    vertices: ball.n(),
                    edge_colors: ball.edge_colors().map(|_| edges.iter().map(|&(u, v)| ball.edge_color(u, v).unwrap_or(0)).collect()),
                    edges: edges.iter().map(|&(u, v)| [u, v]).collect(),
                    labels: ball.labels().map(|(l, _)| l.to_vec()),
                });
            }
        }
        Ok(AtlasDoc { format_version: FORMAT_VERSION, radius: s.radius(), n, entries })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditDistanceDoc {
    pub format_version: u32,
    pub n: usize,
    pub symmetric_difference: usize,
    pub distance: RationalJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseDensityDoc {
    pub format_version: u32,
    pub pattern_vertices: usize,
    pub pattern_edges: usize,
    pub n: usize,
    pub count: u64,
    pub density: RationalJson,
}
