//! Scaling algorithms for maximum weight matching: a (1-eps)-approximate
//! solver for general graphs built on blossom contraction and relaxed
//! complementary slackness, and an exact three-phase solver for bipartite
//! maximum weight (perfect) matching. Both run on exact power-of-two
//! fixed-point duals and are validated by independent oracles and runtime
//! invariant checkers.

pub mod approx;
pub mod bench;
pub mod blossom;
pub mod check;
pub mod exact;
pub mod gen;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod scale;

pub use graph::{normalize_real_weights, Edge, GraphError, Matching, WeightedGraph};
pub use scale::{make_scale_params, ScaleParams, SolveMode};
