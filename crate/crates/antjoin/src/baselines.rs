//! Exact oracles and comparison heuristics.
//!
//! [`exhaustive`] and [`dp_optimal`] find the true optimum over all
//! connectivity-respecting left-deep plans; the remaining algorithms are the
//! comparison field: deterministic greedy, uniform random sampling at a
//! fixed evaluation budget, and simulated annealing.

use std::error::Error;
use std::fmt;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::cost::{evaluate_sequence, join_cardinality, step_selectivity_unchecked, PlanCost};
use crate::graph::{JoinOrder, QueryGraph, TableId};

/// Largest table count [`exhaustive`] accepts.
pub const EXHAUSTIVE_MAX_TABLES: usize = 10;
/// Largest table count [`dp_optimal`] accepts.
pub const DP_MAX_TABLES: usize = 20;

/// Outcome of one baseline run. `cost` always equals `tour_cost(order)`;
/// `evaluations` counts complete tour evaluations, the unit of fair-budget
/// comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub order: JoinOrder,
    pub cost: PlanCost,
    pub evaluations: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineError {
    TooLarge { n: usize, limit: usize },
    InvalidSaParam { name: &'static str, value: f64 },
}

impl fmt::Display for BaselineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineError::TooLarge { n, limit } => {
                write!(f, "{n} tables exceeds this algorithm's limit of {limit}")
            }
            BaselineError::InvalidSaParam { name, value } => {
                write!(f, "invalid annealing parameter {name} = {value}")
            }
        }
    }
}

impl Error for BaselineError {}

/// Minimum-cost plan over every connectivity-respecting permutation.
/// Enumerates depth-first in lexicographic order, so exact cost ties resolve
/// to the lexicographically smallest order. Guarded to `n <= 10`.
pub fn exhaustive(g: &QueryGraph) -> Result<BaselineResult, BaselineError> {
    let n = g.n();
    if n > EXHAUSTIVE_MAX_TABLES {
        return Err(BaselineError::TooLarge { n, limit: EXHAUSTIVE_MAX_TABLES });
    }
    let started = Instant::now();

    struct Search<'a> {
        g: &'a QueryGraph,
        seq: Vec<TableId>,
        visited: Vec<bool>,
        best: Option<(f64, Vec<TableId>)>,
        evaluations: u64,
    }

    impl Search<'_> {
        fn descend(&mut self, intermediate: f64, partial: f64) {
            let n = self.g.n();
            if self.seq.len() == n {
                self.evaluations += 1;
                if self.best.as_ref().is_none_or(|(b, _)| partial < *b) {
                    self.best = Some((partial, self.seq.clone()));
                }
                return;
            }
            for next in 0..n {
                if self.visited[next] {
                    continue;
                }
                let (inter, part) = if self.seq.is_empty() {
                    (self.g.rows(next) as f64, 0.0)
                } else {
                    if !self.seq.iter().any(|&p| self.g.adjacent(p, next)) {
                        continue;
                    }
                    let sel = step_selectivity_unchecked(self.g, &self.seq, next);
                    let it = join_cardinality(intermediate, self.g.rows(next), sel);
                    (it, partial + it)
                };
                self.seq.push(next);
                self.visited[next] = true;
                self.descend(inter, part);
                self.seq.pop();
                self.visited[next] = false;
            }
        }
    }

    let mut search = Search {
        g,
        seq: Vec::with_capacity(n),
        visited: vec![false; n],
        best: None,
        evaluations: 0,
    };
    search.descend(0.0, 0.0);
    let (_, seq) = search.best.expect("connected graph has at least one valid order");
    let cost = evaluate_sequence(g, &seq);
    Ok(BaselineResult {
        order: JoinOrder::new(seq),
        cost,
        evaluations: search.evaluations,
        elapsed: started.elapsed(),
    })
}

/// Optimal left-deep plan via dynamic programming over connected table
/// subsets. Same optimum as [`exhaustive`], one state per subset, so it
/// scales to `n <= 20`. Ties resolve by subset visit order, which is
/// deterministic but not necessarily lexicographic.
pub fn dp_optimal(g: &QueryGraph) -> Result<BaselineResult, BaselineError> {
    let n = g.n();
    if n > DP_MAX_TABLES {
        return Err(BaselineError::TooLarge { n, limit: DP_MAX_TABLES });
    }
    let started = Instant::now();
    let size = 1usize << n;

    let neighbor_mask: Vec<usize> = (0..n)
        .map(|t| g.neighbors(t).iter().fold(0usize, |m, &u| m | (1 << u)))
        .collect();

    // intermediate cardinality of each subset: product of cardinalities and
    // of all in-subset edge selectivities, computed once per subset
    let mut inter = vec![0.0f64; size];
    for t in 0..n {
        inter[1 << t] = g.rows(t) as f64;
    }
    for s in 1..size {
        if s.count_ones() < 2 {
            continue;
        }
        let low = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        let mut sel = 1.0;
        let mut m = rest;
        while m != 0 {
            let u = m.trailing_zeros() as usize;
            if g.adjacent(low, u) {
                sel *= g.selectivity_or_one(low, u);
            }
            m &= m - 1;
        }
        inter[s] = inter[rest] * g.rows(low) as f64 * sel;
    }

    let mut best = vec![f64::INFINITY; size];
    let mut seen = vec![false; size];
    let mut pred = vec![usize::MAX; size];
    for t in 0..n {
        best[1 << t] = 0.0;
        seen[1 << t] = true;
    }
    for s in 1..size {
        if !seen[s] {
            continue;
        }
        let cost_s = best[s];
        for t in 0..n {
            let bit = 1 << t;
            if s & bit != 0 || neighbor_mask[t] & s == 0 {
                continue;
            }
            let ns = s | bit;
            let cand = cost_s + inter[ns];
            if !seen[ns] || cand < best[ns] {
                seen[ns] = true;
                best[ns] = cand;
                pred[ns] = t;
            }
        }
    }

    let full = size - 1;
    debug_assert!(seen[full], "connected graph reaches the full subset");
    let mut seq_rev = Vec::with_capacity(n);
    let mut s = full;
    while s.count_ones() > 1 {
        let t = pred[s];
        seq_rev.push(t);
        s &= !(1 << t);
    }
    seq_rev.push(s.trailing_zeros() as usize);
    seq_rev.reverse();

    let cost = evaluate_sequence(g, &seq_rev);
    Ok(BaselineResult {
        order: JoinOrder::new(seq_rev),
        cost,
        evaluations: 1,
        elapsed: started.elapsed(),
    })
}

/// Deterministic greedy walk: from `start`, repeatedly append the reachable
/// table whose join produces the smallest next intermediate, lowest id on
/// ties. This is the cost-greedy core of the ant move, without randomness
/// or pheromone.
pub fn greedy_nn(g: &QueryGraph, start: TableId) -> BaselineResult {
    let started = Instant::now();
    let n = g.n();
    let mut seq = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut frontier = vec![false; n];
    seq.push(start);
    visited[start] = true;
    for &u in g.neighbors(start) {
        frontier[u] = true;
    }
    let mut intermediate = g.rows(start) as f64;

    while seq.len() < n {
        let mut chosen: Option<(f64, TableId)> = None;
        for next in 0..n {
            if visited[next] || !frontier[next] {
                continue;
            }
            let sel = step_selectivity_unchecked(g, &seq, next);
            let it = join_cardinality(intermediate, g.rows(next), sel);
            if chosen.is_none_or(|(c, _)| it < c) {
                chosen = Some((it, next));
            }
        }
        let (it, next) = chosen.expect("connected graph always has a reachable table");
        intermediate = it;
        seq.push(next);
        visited[next] = true;
        for &u in g.neighbors(next) {
            frontier[u] = true;
        }
    }

    let cost = evaluate_sequence(g, &seq);
    BaselineResult { order: JoinOrder::new(seq), cost, evaluations: 1, elapsed: started.elapsed() }
}

/// Uniformly random connectivity-respecting order: uniform start, then a
/// uniform choice among the valid next tables at every step.
pub(crate) fn random_valid_order<R: Rng>(g: &QueryGraph, rng: &mut R) -> Vec<TableId> {
    let n = g.n();
    let mut seq = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut frontier = vec![false; n];
    let start = rng.random_range(0..n);
    seq.push(start);
    visited[start] = true;
    for &u in g.neighbors(start) {
        frontier[u] = true;
    }
    let mut candidates = Vec::with_capacity(n);
    while seq.len() < n {
        candidates.clear();
        candidates.extend((0..n).filter(|&u| frontier[u] && !visited[u]));
        let next = candidates[rng.random_range(0..candidates.len())];
        seq.push(next);
        visited[next] = true;
        for &u in g.neighbors(next) {
            frontier[u] = true;
        }
    }
    seq
}

/// Best of `budget` uniformly sampled valid orders. Consumes exactly
/// `budget` tour evaluations, the fair comparator for a colony that uses
/// the same number.
pub fn random_sample<R: Rng>(g: &QueryGraph, budget: u64, rng: &mut R) -> BaselineResult {
    assert!(budget >= 1, "sampling budget must be at least 1");
    let started = Instant::now();
    let mut best: Option<(PlanCost, Vec<TableId>)> = None;
    for _ in 0..budget {
        let seq = random_valid_order(g, rng);
        let cost = evaluate_sequence(g, &seq);
        if best.as_ref().is_none_or(|(b, _)| cost.total < b.total) {
            best = Some((cost, seq));
        }
    }
    let (cost, seq) = best.unwrap();
    BaselineResult {
        order: JoinOrder::new(seq),
        cost,
        evaluations: budget,
        elapsed: started.elapsed(),
    }
}

/// Simulated-annealing knobs. `initial_temp = None` derives the starting
/// temperature from the initial tour cost, which keeps the acceptance rule
/// meaningful across instances whose costs span many orders of magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SaParams {
    pub initial_temp: Option<f64>,
    pub cooling: f64,
    pub steps: usize,
    /// Swap proposals breaking connectivity are redrawn up to this many
    /// times before the step is skipped.
    pub max_retries: usize,
}

impl Default for SaParams {
    fn default() -> Self {
        SaParams { initial_temp: None, cooling: 0.995, steps: 2000, max_retries: 16 }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if let Some(t) = self.initial_temp {
            if !(t > 0.0) {
                return Err(BaselineError::InvalidSaParam { name: "initial_temp", value: t });
            }
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(BaselineError::InvalidSaParam { name: "cooling", value: self.cooling });
        }
        if self.steps < 1 {
            return Err(BaselineError::InvalidSaParam { name: "steps", value: self.steps as f64 });
        }
        Ok(())
    }
}

fn connectivity_ok(g: &QueryGraph, seq: &[TableId]) -> bool {
    (1..seq.len()).all(|k| seq[..k].iter().any(|&p| g.adjacent(p, seq[k])))
}

/// Swap-neighborhood annealing over valid orders with Metropolis acceptance
/// and geometric cooling. Invalid swaps are resampled a bounded number of
/// times, then the step is skipped, so `evaluations <= steps + 1`.
pub fn simulated_annealing<R: Rng>(
    g: &QueryGraph,
    params: &SaParams,
    rng: &mut R,
) -> Result<BaselineResult, BaselineError> {
    params.validate()?;
    let started = Instant::now();
    let n = g.n();

    let mut current = random_valid_order(g, rng);
    let mut current_cost = evaluate_sequence(g, &current);
    let mut evaluations = 1u64;
    let mut best = (current_cost.clone(), current.clone());

    let mut temp = params
        .initial_temp
        .unwrap_or_else(|| (0.5 * current_cost.total).max(f64::MIN_POSITIVE));

    for _ in 0..params.steps {
        let mut proposal = None;
        for _ in 0..params.max_retries.max(1) {
            // distinct pair (i, j) in two draws
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let mut cand = current.clone();
            cand.swap(i, j);
            if connectivity_ok(g, &cand) {
                proposal = Some(cand);
                break;
            }
        }
        if let Some(cand) = proposal {
            let cand_cost = evaluate_sequence(g, &cand);
            evaluations += 1;
            let delta = cand_cost.total - current_cost.total;
            let accept = delta <= 0.0 || rng.random::<f64>() < (-delta / temp).exp();
            if accept {
                current = cand;
                current_cost = cand_cost;
                if current_cost.total < best.0.total {
                    best = (current_cost.clone(), current.clone());
                }
            }
        }
        temp *= params.cooling;
    }

    let (cost, seq) = best;
    Ok(BaselineResult {
        order: JoinOrder::new(seq),
        cost,
        evaluations,
        elapsed: started.elapsed(),
    })
}
