//! Seeded random query-graph generation.
//!
//! Cardinalities are uniform over a closed range, selectivities log-uniform,
//! and the join topology is one of the standard benchmark shapes. The same
//! spec always generates the same graph.

use std::error::Error;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{JoinEdge, QueryGraph, TableStats};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Chain,
    Star,
    Cycle,
    Clique,
    RandomConnected,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Topology::Chain => "chain",
            Topology::Star => "star",
            Topology::Cycle => "cycle",
            Topology::Clique => "clique",
            Topology::RandomConnected => "random_connected",
        };
        f.write_str(s)
    }
}

impl FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chain" => Ok(Topology::Chain),
            "star" => Ok(Topology::Star),
            "cycle" => Ok(Topology::Cycle),
            "clique" => Ok(Topology::Clique),
            "random_connected" => Ok(Topology::RandomConnected),
            _ => Err(format!(
                "unknown topology {s:?}, expected chain|star|cycle|clique|random_connected"
            )),
        }
    }
}

/// Recipe for one random graph family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadSpec {
    pub num_tables: usize,
    pub card_min: u64,
    pub card_max: u64,
    pub topology: Topology,
    pub sel_min: f64,
    pub sel_max: f64,
    pub seed: u64,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec {
            num_tables: 8,
            card_min: 50,
            card_max: 750,
            topology: Topology::Chain,
            sel_min: 0.001,
            sel_max: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadError {
    TooFewTables { n: usize },
    BadCardRange { min: u64, max: u64 },
    BadSelRange { min: f64, max: f64 },
    CycleTooSmall { n: usize },
}

impl fmt::Display for WorkloadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkloadError::TooFewTables { n } => {
                write!(f, "workload needs at least 2 tables, got {n}")
            }
            WorkloadError::BadCardRange { min, max } => {
                write!(f, "cardinality range [{min}, {max}] must satisfy 1 <= min <= max")
            }
            WorkloadError::BadSelRange { min, max } => {
                write!(f, "selectivity range [{min}, {max}] must satisfy 0 < min <= max <= 1")
            }
            WorkloadError::CycleTooSmall { n } => {
                write!(f, "a cycle topology needs at least 3 tables, got {n}")
            }
        }
    }
}

impl Error for WorkloadError {}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        if self.num_tables < 2 {
            return Err(WorkloadError::TooFewTables { n: self.num_tables });
        }
        if self.card_min < 1 || self.card_min > self.card_max {
            return Err(WorkloadError::BadCardRange { min: self.card_min, max: self.card_max });
        }
        if !(self.sel_min > 0.0 && self.sel_min <= self.sel_max && self.sel_max <= 1.0) {
            return Err(WorkloadError::BadSelRange { min: self.sel_min, max: self.sel_max });
        }
        if self.topology == Topology::Cycle && self.num_tables < 3 {
            return Err(WorkloadError::CycleTooSmall { n: self.num_tables });
        }
        Ok(())
    }

    /// Copy with a different seed; the benchmark derives per-run instances
    /// this way.
    pub fn with_seed(&self, seed: u64) -> Self {
        WorkloadSpec { seed, ..self.clone() }
    }
}

/// Uniform random labeled tree on `n` nodes via a random Pruefer sequence,
/// as canonical `(a, b)` pairs with `a < b`.
fn random_spanning_tree<R: Rng>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let pruefer: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &p in &pruefer {
        degree[p] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &p in &pruefer {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf always exists");
        edges.push((leaf.min(p), leaf.max(p)));
        degree[leaf] -= 1;
        degree[p] -= 1;
    }
    let mut last = (0..n).filter(|&v| degree[v] == 1);
    let a = last.next().unwrap();
    let b = last.next().unwrap();
    edges.push((a.min(b), a.max(b)));
    edges
}

/// Generates the graph described by `spec`. Cardinalities are drawn first
/// (in table order), then the edge set, then one log-uniform selectivity
/// per edge in sorted edge order, all from a single seeded stream.
pub fn generate(spec: &WorkloadSpec) -> Result<QueryGraph, WorkloadError> {
    spec.validate()?;
    let n = spec.num_tables;
    let mut rng = rng::stream(spec.seed, &[]);

    let tables: Vec<TableStats> = (0..n)
        .map(|i| TableStats::new(i, format!("t{i}"), rng.random_range(spec.card_min..=spec.card_max)))
        .collect();

    let mut pairs: Vec<(usize, usize)> = match spec.topology {
        Topology::Chain => (1..n).map(|i| (i - 1, i)).collect(),
        Topology::Star => (1..n).map(|i| (0, i)).collect(),
        Topology::Cycle => {
            let mut v: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            v.push((0, n - 1));
            v
        }
        Topology::Clique => {
            let mut v = Vec::with_capacity(n * (n - 1) / 2);
            for a in 0..n {
                for b in a + 1..n {
                    v.push((a, b));
                }
            }
            v
        }
        Topology::RandomConnected => {
            let mut v = random_spanning_tree(n, &mut rng);
            v.sort_unstable();
            let in_tree: std::collections::HashSet<_> = v.iter().copied().collect();
            for a in 0..n {
                for b in a + 1..n {
                    if !in_tree.contains(&(a, b)) && rng.random::<f64>() < 0.25 {
                        v.push((a, b));
                    }
                }
            }
            v
        }
    };
    pairs.sort_unstable();

    let (ln_min, ln_max) = (spec.sel_min.ln(), spec.sel_max.ln());
    let edges: Vec<JoinEdge> = pairs
        .into_iter()
        .map(|(a, b)| {
            let sel = if ln_min == ln_max {
                spec.sel_min
            } else {
                (rng.random_range(ln_min..ln_max)).exp().min(1.0)
            };
            JoinEdge::new(a, b, sel)
        })
        .collect();

    Ok(QueryGraph::new(tables, edges).expect("generated graphs satisfy all invariants"))
}

/// The benchmark's table-count scenarios: `(table count, target mean rows
/// per table)`.
pub fn table1_scenarios() -> Vec<(usize, u64)> {
    vec![(8, 383), (12, 418), (16, 362), (20, 397), (24, 403), (28, 354), (32, 429)]
}
