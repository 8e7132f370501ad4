//! Join-order optimization mapped onto an open-path traveling-salesperson
//! problem and solved with an ant colony system, next to exact and heuristic
//! baselines and a reproducible benchmark harness.
//!
//! Tables are cities, joinable pairs are roads, and a left-deep join order
//! is an open tour: the ant never returns to its first table. Tours are
//! scored by the sum of intermediate join cardinalities, so the colony is
//! hunting the permutation with the cheapest intermediates.
//!
//! - [`graph`] — query graphs, join orders, validation, JSON I/O
//! - [`cost`] — the C_out cost model and the static pairwise heuristic
//! - [`aco`] — the ant colony system optimizer
//! - [`baselines`] — exhaustive search, subset DP, greedy, random, annealing
//! - [`workload`] — seeded random graph generation over standard topologies
//! - [`bench`] — scenario sweeps with CSV output

pub mod aco;
pub mod baselines;
pub mod bench;
pub mod cost;
pub mod graph;
pub mod rng;
pub mod workload;

pub use aco::{optimize, AcoParams, OptResult, PheromoneMatrix};
pub use baselines::{
    dp_optimal, exhaustive, greedy_nn, random_sample, simulated_annealing, BaselineResult,
    SaParams,
};
pub use bench::{ant_count_sweep, run_benchmark, Algorithm, AntPolicy, BenchConfig, BenchRecord};
pub use cost::{build_eta, tour_cost, tour_cost_relaxed, EtaMatrix, PlanCost};
pub use graph::{JoinEdge, JoinOrder, QueryGraph, TableId, TableStats};
pub use workload::{generate, table1_scenarios, Topology, WorkloadSpec};
