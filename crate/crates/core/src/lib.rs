//! Local statistics of bounded-degree graphs: rooted-ball codes, the
//! weighted statistical distance, quasihomogeneity testing, partitioning
//! into quasihomogeneous parts, and proper edge colorings.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix the exact
//! rational instantiation used by the command-line tool and the tests.

pub mod ball;
pub mod coloring;
pub mod decomposer;
pub mod generators;
pub mod graph;
pub mod io;
pub mod quasihom;
pub mod scalar;
pub mod stats;

pub use ball::{ball_census, canonical_code, extract_ball, BallCode, Decorations, LabelView, RootedBall};
pub use decomposer::{decompose, verify_partition, Partition, PartitionVerdict};
pub use graph::{Graph, GraphError, Subgraph, VertexSubset};
pub use quasihom::{check_exact, falsify_heuristic, verify_certificate, QuasihomParams, QuasihomVerdict, VerdictStatus};
pub use scalar::Scalar;
pub use stats::{d_s, mixture, stat_vector, Distance, StatVector, StatsError};

/// Arbitrary-precision rational.
pub type Rational = num_rational::BigRational;
pub type ExactStatVector = StatVector<Rational>;
pub type FloatStatVector = StatVector<f64>;
pub type ExactDistance = Distance<Rational>;
pub type ExactParams = QuasihomParams<Rational>;
pub type ExactVerdict = QuasihomVerdict<Rational>;
pub type ExactPartitionVerdict = PartitionVerdict<Rational>;
