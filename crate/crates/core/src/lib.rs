//! Sublinear-time approximate k-clique counting in the query model
//! (degree, i-th neighbor, pair adjacency and uniform vertex queries).
//!
//! [`estimator::approximate_cliques`] runs one estimate for a given
//! clique-count guess; [`search::approximate_cliques_auto`] finds the guess
//! itself. [`baseline`] holds exact counters and instance generators.
//!
//! ```
//! use subclique::{approximate_cliques, count_cliques_exact, Graph, Params, QueryOracle};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])?;
//! let oracle = QueryOracle::new(&g);
//! let params = Params::derive(g.n(), 3, 0.9 * g.m() as f64, 2.0, 0.5, 0.1, 42)?;
//! let report = approximate_cliques(&oracle, &params);
//! println!("{:?} after {} queries", report.value(), report.queries.total());
//! assert_eq!(count_cliques_exact(&g, 3)?.total, 4);
//! # Ok(())
//! # }
//! ```

pub mod baseline;
pub mod clique_sampler;
pub mod estimator;
pub mod graph;
pub mod harness;
pub mod params;
pub mod popularity;
pub mod sampler;
pub mod search;
pub mod typical;

pub use baseline::{count_cliques_exact, CliqueCensus};
pub use estimator::{approximate_cliques, EstimateReport, Outcome};
pub use graph::{load_edge_list, Graph, GraphError, LoopPolicy, Probe, QueryCounts, QueryOracle, VertexId};
pub use params::{Constants, ParamError, Params};
pub use search::{approximate_cliques_auto, AutoReport, EdgeEstimate};
