//! Exact parallel maximum-clique search.
//!
//! The solver primes an incumbent with two greedy heuristics, orders vertices
//! by coreness, and then visits right-neighborhoods from the densest core
//! outward. Each neighborhood is filtered against the incumbent and what is
//! left goes to either a branch-and-bound clique search or a vertex-cover
//! solver on the complement. Neighbor sets are built lazily and only for
//! vertices that can still matter.
//!
//! ```
//! use lazymc::{lazy_mc, CsrGraph, SolverConfig};
//!
//! let g = CsrGraph::from_edges([(1, 2), (2, 3), (1, 3), (3, 4)]);
//! let r = lazy_mc(&g, &SolverConfig::default()).unwrap();
//! assert_eq!(r.omega, 3);
//! assert_eq!(r.clique, vec![1, 2, 3]);
//! ```

pub mod bitset;
pub mod driver;
pub mod error;
pub mod gen;
pub mod graph;
pub mod heuristics;
pub mod incumbent;
pub mod lazy_graph;
pub mod ordering;
pub mod par;
pub mod setops;
pub mod subsolvers;

pub use driver::{
    choose_algorithm, lazy_mc, must_may_stats, MustMayStats, PhaseReport, SolveResult,
    SolverConfig, SubSolver,
};
pub use error::{Error, Result};
pub use graph::{load_binary, load_edge_list, CsrGraph, InducedSubgraph, VertexId};
pub use incumbent::{CliqueSink, Incumbent};
pub use lazy_graph::{LazyGraph, PrepopulatePolicy};
pub use par::{with_threads, Execution};
