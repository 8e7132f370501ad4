//! Ant colony system for join ordering.
//!
//! Each ant walks an open tour over the tables: it starts on a random
//! table and repeatedly moves to a joinable unvisited table, steered by
//! pheromone `tau` and the static cost heuristic `eta`. The move rule is
//! pseudo-random proportional: with probability `q0` the ant exploits the
//! best-scoring candidate, otherwise it samples proportionally to
//! `tau(r,u) * eta(r,u)^beta`. Traversed arcs decay toward `tau0` as the
//! ant walks (local rule); after every iteration the arcs of the best tour
//! found so far are reinforced with `rho / L_gb` while all arcs evaporate
//! (global rule).
//!
//! Runs are deterministic for a given seed: every ant draws from its own
//! ChaCha stream keyed by `(seed, iteration, ant)`, so sequential and
//! parallel construction consume identical randomness. The two modes still
//! differ - and are documented to differ - in when local updates land:
//! online per step, or batched per iteration in ant order.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::baselines::greedy_nn;
use crate::cost::{build_eta, join_cardinality, step_selectivity_unchecked, EtaMatrix, PlanCost};
use crate::graph::{JoinOrder, QueryGraph, TableId};
use crate::rng::ant_stream;

/// All colony tunables. `num_ants = None` uses one ant per table.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcoParams {
    pub num_ants: Option<usize>,
    /// Heuristic exponent in the move rule.
    pub beta: f64,
    /// Evaporation rate of both pheromone rules, in (0, 1).
    pub rho: f64,
    /// Exploitation probability of the move rule, in [0, 1].
    pub q0: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Batched per-iteration construction; see the module docs.
    pub parallel: bool,
    /// When false, ants may hop to non-adjacent tables (cross products).
    pub strict_connectivity: bool,
    /// Initial pheromone level; `None` derives `1 / (n * L_nn)` from a
    /// greedy tour.
    pub tau0: Option<f64>,
}

impl Default for AcoParams {
    fn default() -> Self {
        AcoParams {
            num_ants: None,
            beta: 2.0,
            rho: 0.1,
            q0: 0.9,
            iterations: 30,
            seed: 0,
            parallel: false,
            strict_connectivity: true,
            tau0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcoError {
    pub param: &'static str,
    pub value: f64,
}

impl std::fmt::Display for AcoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid colony parameter {} = {}", self.param, self.value)
    }
}

impl std::error::Error for AcoError {}

impl AcoParams {
    pub fn validate(&self) -> Result<(), AcoError> {
        if let Some(m) = self.num_ants {
            if m < 1 {
                return Err(AcoError { param: "num_ants", value: m as f64 });
            }
        }
        if !(self.beta >= 0.0) {
            return Err(AcoError { param: "beta", value: self.beta });
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(AcoError { param: "rho", value: self.rho });
        }
        if !(0.0..=1.0).contains(&self.q0) {
            return Err(AcoError { param: "q0", value: self.q0 });
        }
        if self.iterations < 1 {
            return Err(AcoError { param: "iterations", value: self.iterations as f64 });
        }
        if let Some(t) = self.tau0 {
            if !(t > 0.0) {
                return Err(AcoError { param: "tau0", value: t });
            }
        }
        Ok(())
    }

    /// Ant count for an `n`-table graph.
    pub fn ants_for(&self, n: usize) -> usize {
        self.num_ants.unwrap_or(n)
    }
}

/// Symmetric positive pheromone levels over table pairs. The diagonal is
/// never read.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneMatrix {
    n: usize,
    tau0: f64,
    values: Vec<f64>,
}

impl PheromoneMatrix {
    pub fn uniform(n: usize, tau0: f64) -> Self {
        let mut values = vec![tau0; n * n];
        for t in 0..n {
            values[t * n + t] = 0.0;
        }
        PheromoneMatrix { n, tau0, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    #[inline]
    pub fn get(&self, r: TableId, s: TableId) -> f64 {
        self.values[r * self.n + s]
    }

    /// Local rule: decay the traversed arc toward `tau0`,
    /// `tau <- (1 - rho) * tau + rho * tau0`, both directions.
    pub fn local_update(&mut self, r: TableId, s: TableId, rho: f64) {
        debug_assert_ne!(r, s);
        let v = (1.0 - rho) * self.values[r * self.n + s] + rho * self.tau0;
        self.values[r * self.n + s] = v;
        self.values[s * self.n + r] = v;
    }

    /// Global rule: every pair evaporates by `1 - rho`; the `n - 1`
    /// consecutive arcs of the best tour additionally receive
    /// `rho / l_gb`. The open tour has no wrap-around arc.
    pub fn global_update(&mut self, best: &[TableId], l_gb: f64, rho: f64) {
        let n = self.n;
        for r in 0..n {
            for s in 0..n {
                if r != s {
                    self.values[r * n + s] *= 1.0 - rho;
                }
            }
        }
        let deposit = rho / l_gb;
        for w in best.windows(2) {
            self.values[w[0] * n + w[1]] += deposit;
            self.values[w[1] * n + w[0]] += deposit;
        }
    }
}

/// Pheromone level `tau0 = 1 / (n * L_nn)`, with `L_nn` the cost of the
/// greedy walk started on table 0, unless the params pin an explicit level.
pub fn init_pheromone(g: &QueryGraph, params: &AcoParams) -> PheromoneMatrix {
    let tau0 = params.tau0.unwrap_or_else(|| {
        let l_nn = greedy_nn(g, 0).cost.total;
        if l_nn.is_finite() {
            1.0 / (g.n() as f64 * l_nn)
        } else {
            // pathological overflow instance; keep positivity
            f64::MIN_POSITIVE
        }
    });
    PheromoneMatrix::uniform(g.n(), tau0)
}

/// One ant mid-walk: its position, the tour so far, and the running cost.
#[derive(Debug, Clone)]
pub struct AntState {
    current: TableId,
    visited: Vec<TableId>,
    visited_mask: Vec<bool>,
    // tables adjacent to anything visited; the prohibited list's complement
    // is intersected with this in strict mode
    frontier: Vec<bool>,
    intermediate: f64,
    steps: Vec<f64>,
    total: f64,
}

impl AntState {
    pub fn start(g: &QueryGraph, start: TableId) -> Self {
        let n = g.n();
        let mut visited_mask = vec![false; n];
        visited_mask[start] = true;
        let mut frontier = vec![false; n];
        for &u in g.neighbors(start) {
            frontier[u] = true;
        }
        AntState {
            current: start,
            visited: vec![start],
            visited_mask,
            frontier,
            intermediate: g.rows(start) as f64,
            steps: Vec::with_capacity(n - 1),
            total: 0.0,
        }
    }

    pub fn current(&self) -> TableId {
        self.current
    }

    pub fn visited(&self) -> &[TableId] {
        &self.visited
    }

    pub fn is_complete(&self, g: &QueryGraph) -> bool {
        self.visited.len() == g.n()
    }

    /// Moves to `next`, accumulating the join's intermediate cardinality.
    pub fn advance(&mut self, g: &QueryGraph, next: TableId) {
        debug_assert!(!self.visited_mask[next]);
        let sel = step_selectivity_unchecked(g, &self.visited, next);
        self.intermediate = join_cardinality(self.intermediate, g.rows(next), sel);
        self.steps.push(self.intermediate);
        self.total += self.intermediate;
        self.visited.push(next);
        self.visited_mask[next] = true;
        self.frontier[next] = false;
        for &u in g.neighbors(next) {
            if !self.visited_mask[u] {
                self.frontier[u] = true;
            }
        }
        self.current = next;
    }

    pub fn into_tour(self) -> (JoinOrder, PlanCost) {
        (JoinOrder::new(self.visited), PlanCost { total: self.total, steps: self.steps })
    }
}

/// Unvisited tables the ant may move to, ascending. Strict mode keeps only
/// tables adjacent to some visited table; on a connected graph that is
/// never empty. Relaxed mode allows any unvisited table.
pub fn candidate_set(g: &QueryGraph, state: &AntState, strict: bool) -> Vec<TableId> {
    (0..g.n())
        .filter(|&u| !state.visited_mask[u] && (!strict || state.frontier[u]))
        .collect()
}

/// Move-rule scores `tau(r, u) * eta(r, u)^beta` for each candidate `u`,
/// with `r` the ant's current table.
pub fn transition_scores(
    current: TableId,
    candidates: &[TableId],
    tau: &PheromoneMatrix,
    eta: &EtaMatrix,
    beta: f64,
) -> Vec<(TableId, f64)> {
    candidates
        .iter()
        .map(|&u| (u, tau.get(current, u) * eta.get(current, u).powf(beta)))
        .collect()
}

/// Normalizes scores into the exploration distribution.
pub fn exploration_probabilities(scores: &[(TableId, f64)]) -> Vec<f64> {
    let total: f64 = scores.iter().map(|&(_, s)| s).sum();
    scores.iter().map(|&(_, s)| s / total).collect()
}

/// Pseudo-random proportional rule: draw `q`; exploit the arg max when
/// `q <= q0` (ties to the lowest id), otherwise roulette-sample the
/// exploration distribution. One draw for `q`, at most one more for the
/// sample.
pub fn choose_next<R: Rng>(
    current: TableId,
    candidates: &[TableId],
    tau: &PheromoneMatrix,
    eta: &EtaMatrix,
    params: &AcoParams,
    rng: &mut R,
) -> TableId {
    debug_assert!(!candidates.is_empty());
    let scores = transition_scores(current, candidates, tau, eta, params.beta);
    let q: f64 = rng.random();
    if q <= params.q0 {
        let mut best = scores[0];
        for &(u, s) in &scores[1..] {
            if s > best.1 {
                best = (u, s);
            }
        }
        best.0
    } else {
        let total: f64 = scores.iter().map(|&(_, s)| s).sum();
        let pick = rng.random::<f64>() * total;
        let mut acc = 0.0;
        for &(u, s) in &scores {
            acc += s;
            if pick < acc {
                return u;
            }
        }
        scores.last().unwrap().0
    }
}

/// How a constructing ant sees and touches pheromone: mutating it in place
/// (sequential semantics) or reading a frozen snapshot while logging the
/// traversed arcs for an ordered merge at the iteration barrier.
enum TauAccess<'a> {
    Online { tau: &'a mut PheromoneMatrix, rho: f64 },
    Frozen { tau: &'a PheromoneMatrix, log: &'a mut Vec<(TableId, TableId)> },
}

impl TauAccess<'_> {
    fn matrix(&self) -> &PheromoneMatrix {
        match self {
            TauAccess::Online { tau, .. } => tau,
            TauAccess::Frozen { tau, .. } => tau,
        }
    }

    fn traverse(&mut self, r: TableId, s: TableId) {
        match self {
            TauAccess::Online { tau, rho } => tau.local_update(r, s, *rho),
            TauAccess::Frozen { log, .. } => log.push((r, s)),
        }
    }
}

fn build_tour<R: Rng>(
    g: &QueryGraph,
    mut access: TauAccess<'_>,
    eta: &EtaMatrix,
    params: &AcoParams,
    rng: &mut R,
) -> (JoinOrder, PlanCost) {
    let n = g.n();
    let start = rng.random_range(0..n);
    let mut state = AntState::start(g, start);
    while !state.is_complete(g) {
        let candidates = candidate_set(g, &state, params.strict_connectivity);
        let next = choose_next(state.current(), &candidates, access.matrix(), eta, params, rng);
        let from = state.current();
        state.advance(g, next);
        access.traverse(from, next);
    }
    state.into_tour()
}

/// Builds one complete tour with online local updates: each traversed arc
/// decays toward `tau0` immediately after the step. The ant starts on a
/// uniformly drawn table.
pub fn construct_tour<R: Rng>(
    g: &QueryGraph,
    tau: &mut PheromoneMatrix,
    eta: &EtaMatrix,
    params: &AcoParams,
    rng: &mut R,
) -> (JoinOrder, PlanCost) {
    build_tour(g, TauAccess::Online { tau, rho: params.rho }, eta, params, rng)
}

/// Full optimization result. `trace[i]` is the best total after iteration
/// `i`; it never increases and ends at `best_cost.total`.
#[derive(Debug, Clone)]
pub struct OptResult {
    pub best_order: JoinOrder,
    pub best_cost: PlanCost,
    pub trace: Vec<f64>,
    pub elapsed: Duration,
    pub evaluations: u64,
}

/// Runs the colony: `iterations` rounds of `num_ants` tours, a global
/// pheromone update with the best-so-far tour after every round.
/// Deterministic for a given `(graph, params, seed)` in both modes.
pub fn optimize(g: &QueryGraph, params: &AcoParams) -> Result<OptResult, AcoError> {
    params.validate()?;
    let started = Instant::now();
    let n = g.n();
    let num_ants = params.ants_for(n);
    let eta = build_eta(g);
    let mut tau = init_pheromone(g, params);

    let mut best: Option<(PlanCost, JoinOrder)> = None;
    let mut trace = Vec::with_capacity(params.iterations);
    let mut evaluations = 0u64;

    for iteration in 0..params.iterations {
        let tours: Vec<(JoinOrder, PlanCost, Vec<(TableId, TableId)>)> = if params.parallel {
            let tau_ref = &tau;
            let eta_ref = &eta;
            (0..num_ants)
                .into_par_iter()
                .map(|ant| {
                    let mut rng = ant_stream(params.seed, iteration as u64, ant as u64);
                    let mut log = Vec::with_capacity(n - 1);
                    let (order, cost) = build_tour(
                        g,
                        TauAccess::Frozen { tau: tau_ref, log: &mut log },
                        eta_ref,
                        params,
                        &mut rng,
                    );
                    (order, cost, log)
                })
                .collect()
        } else {
            let mut out = Vec::with_capacity(num_ants);
            for ant in 0..num_ants {
                let mut rng = ant_stream(params.seed, iteration as u64, ant as u64);
                let (order, cost) = construct_tour(g, &mut tau, &eta, params, &mut rng);
                out.push((order, cost, Vec::new()));
            }
            out
        };

        // merge in ant-index order; in parallel mode this also replays the
        // batched local updates
        for (order, cost, log) in tours {
            evaluations += 1;
            for (r, s) in log {
                tau.local_update(r, s, params.rho);
            }
            if best.as_ref().is_none_or(|(b, _)| cost.total < b.total) {
                best = Some((cost, order));
            }
        }

        let (best_cost, best_order) = best.as_ref().expect("at least one ant ran");
        tau.global_update(best_order.as_slice(), best_cost.total, params.rho);
        trace.push(best_cost.total);
    }

    let (best_cost, best_order) = best.expect("at least one iteration ran");
    Ok(OptResult {
        best_order,
        best_cost,
        trace,
        elapsed: started.elapsed(),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{JoinEdge, TableStats};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain_abc() -> QueryGraph {
        QueryGraph::new(
            vec![
                TableStats::new(0, "A", 100),
                TableStats::new(1, "B", 10),
                TableStats::new(2, "C", 1000),
            ],
            vec![JoinEdge::new(0, 1, 0.1), JoinEdge::new(1, 2, 0.01)],
        )
        .unwrap()
    }

    fn star_with_center(center_rows: u64) -> QueryGraph {
        QueryGraph::new(
            vec![
                TableStats::new(0, "S", center_rows),
                TableStats::new(1, "L1", 100),
                TableStats::new(2, "L2", 200),
                TableStats::new(3, "L3", 300),
            ],
            vec![
                JoinEdge::new(0, 1, 0.5),
                JoinEdge::new(0, 2, 0.1),
                JoinEdge::new(0, 3, 0.2),
            ],
        )
        .unwrap()
    }

    fn random_graph(n: usize, seed: u64) -> QueryGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tables =
            (0..n).map(|i| TableStats::new(i, format!("t{i}"), rng.random_range(1..=1000))).collect();
        let mut edges = Vec::new();
        for i in 1..n {
            edges.push(JoinEdge::new(i - 1, i, rng.random_range(0.001..=1.0)));
        }
        for a in 0..n {
            for b in a + 2..n {
                if rng.random::<f64>() < 0.3 {
                    edges.push(JoinEdge::new(a, b, rng.random_range(0.001..=1.0)));
                }
            }
        }
        QueryGraph::new(tables, edges).unwrap()
    }

    #[test]
    fn tau0_from_greedy_tour() {
        let g = chain_abc();
        let tau = init_pheromone(&g, &AcoParams::default());
        // greedy from table 0 walks the chain for 1100, n = 3
        assert_relative_eq!(tau.tau0(), 1.0 / 3300.0, max_relative = 1e-12);
        for r in 0..3 {
            for s in 0..3 {
                if r != s {
                    assert_eq!(tau.get(r, s), tau.tau0());
                    assert!(tau.get(r, s) > 0.0);
                }
            }
        }
    }

    #[test]
    fn candidates_follow_edges() {
        let g = chain_abc();
        let s = AntState::start(&g, 0);
        assert_eq!(candidate_set(&g, &s, true), vec![1]);
        let s = AntState::start(&g, 1);
        assert_eq!(candidate_set(&g, &s, true), vec![0, 2]);
        // relaxed mode ignores adjacency
        let s = AntState::start(&g, 0);
        assert_eq!(candidate_set(&g, &s, false), vec![1, 2]);
    }

    #[test]
    fn candidates_on_star_leaf() {
        let g = star_with_center(10);
        let s = AntState::start(&g, 1);
        assert_eq!(candidate_set(&g, &s, true), vec![0]);
    }

    // graph tuned so eta(0,1) = 0.5 and eta(0,2) = 0.25
    fn eta_probe_graph() -> QueryGraph {
        QueryGraph::new(
            vec![
                TableStats::new(0, "R", 1),
                TableStats::new(1, "X", 2),
                TableStats::new(2, "Y", 4),
            ],
            vec![JoinEdge::new(0, 1, 1.0), JoinEdge::new(0, 2, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn scores_weight_eta_by_beta() {
        let g = eta_probe_graph();
        let eta = build_eta(&g);
        let tau = PheromoneMatrix::uniform(3, 1.0);
        let scores = transition_scores(0, &[1, 2], &tau, &eta, 2.0);
        assert_eq!(scores.len(), 2);
        assert_relative_eq!(scores[0].1, 0.25, max_relative = 1e-12);
        assert_relative_eq!(scores[1].1, 0.0625, max_relative = 1e-12);

        // beta = 0 reduces every score to tau
        let flat = transition_scores(0, &[1, 2], &tau, &eta, 0.0);
        assert_eq!(flat[0].1, 1.0);
        assert_eq!(flat[1].1, 1.0);

        let single = transition_scores(0, &[2], &tau, &eta, 2.0);
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn forced_exploitation_takes_argmax() {
        let g = eta_probe_graph();
        let eta = build_eta(&g);
        let tau = PheromoneMatrix::uniform(3, 1.0);
        let params = AcoParams { q0: 1.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            assert_eq!(choose_next(0, &[1, 2], &tau, &eta, &params, &mut rng), 1);
        }
    }

    #[test]
    fn exploitation_ties_break_to_lowest_id() {
        // identical leaves make eta(0,1) == eta(0,2)
        let g = QueryGraph::new(
            vec![
                TableStats::new(0, "R", 2),
                TableStats::new(1, "X", 8),
                TableStats::new(2, "Y", 8),
            ],
            vec![JoinEdge::new(0, 1, 0.5), JoinEdge::new(0, 2, 0.5)],
        )
        .unwrap();
        let eta = build_eta(&g);
        let tau = PheromoneMatrix::uniform(3, 1.0);
        let params = AcoParams { q0: 1.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(choose_next(0, &[1, 2], &tau, &eta, &params, &mut rng), 1);
    }

    #[test]
    fn exploration_distribution_matches_score_ratio() {
        let g = eta_probe_graph();
        let eta = build_eta(&g);
        let tau = PheromoneMatrix::uniform(3, 1.0);
        let scores = transition_scores(0, &[1, 2], &tau, &eta, 2.0);
        let probs = exploration_probabilities(&scores);
        assert_relative_eq!(probs[0], 0.8, max_relative = 1e-12);
        assert_relative_eq!(probs[1], 0.2, max_relative = 1e-12);

        // sampling frequencies agree with the distribution
        let params = AcoParams { q0: 0.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut picked_first = 0usize;
        let draws = 20_000;
        for _ in 0..draws {
            if choose_next(0, &[1, 2], &tau, &eta, &params, &mut rng) == 1 {
                picked_first += 1;
            }
        }
        let freq = picked_first as f64 / draws as f64;
        assert!((freq - 0.8).abs() < 0.02, "frequency {freq} too far from 0.8");
    }

    #[test]
    fn scaling_scores_changes_nothing() {
        let scores = vec![(4usize, 0.3), (7, 1.7), (9, 0.9)];
        let scaled: Vec<_> = scores.iter().map(|&(u, s)| (u, s * 1234.5)).collect();
        let p1 = exploration_probabilities(&scores);
        let p2 = exploration_probabilities(&scaled);
        for (a, b) in p1.iter().zip(&p2) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        let argmax = |v: &[(usize, f64)]| {
            v.iter().fold(v[0], |b, &x| if x.1 > b.1 { x } else { b }).0
        };
        assert_eq!(argmax(&scores), argmax(&scaled));
    }

    #[test]
    fn local_update_worked_values() {
        let mut tau = PheromoneMatrix::uniform(3, 0.5);
        // force the (0,1) entry to 1.0 and decay it toward tau0 = 0.5
        tau.values[1] = 1.0;
        tau.values[3] = 1.0;
        tau.local_update(0, 1, 0.1);
        assert_relative_eq!(tau.get(0, 1), 0.95, max_relative = 1e-12);
        assert_eq!(tau.get(0, 1), tau.get(1, 0));

        // fixed point at tau0
        let mut fixed = PheromoneMatrix::uniform(3, 0.5);
        fixed.local_update(0, 1, 0.1);
        assert_relative_eq!(fixed.get(0, 1), 0.5, max_relative = 1e-12);

        // repeated application contracts toward tau0
        let mut dist = (tau.get(0, 1) - 0.5f64).abs();
        for _ in 0..200 {
            tau.local_update(0, 1, 0.1);
            let d = (tau.get(0, 1) - 0.5f64).abs();
            assert!(d <= dist);
            dist = d;
        }
        assert!(dist < 1e-6);
    }

    #[test]
    fn global_update_worked_values() {
        let mut tau = PheromoneMatrix::uniform(3, 1.0);
        tau.global_update(&[0, 1, 2], 50.0, 0.1);
        // on-tour arc: 0.9 * 1 + 0.1 / 50
        assert_relative_eq!(tau.get(0, 1), 0.902, max_relative = 1e-12);
        assert_relative_eq!(tau.get(1, 2), 0.902, max_relative = 1e-12);
        // off-tour arc: pure evaporation
        assert_relative_eq!(tau.get(0, 2), 0.9, max_relative = 1e-12);
        for r in 0..3 {
            for s in 0..3 {
                if r != s {
                    assert!(tau.get(r, s) > 0.0);
                    assert_eq!(tau.get(r, s), tau.get(s, r));
                }
            }
        }
    }

    #[test]
    fn two_table_tours_from_both_starts_cost_the_same() {
        let g = QueryGraph::new(
            vec![TableStats::new(0, "A", 6), TableStats::new(1, "B", 9)],
            vec![JoinEdge::new(0, 1, 0.5)],
        )
        .unwrap();
        let params = AcoParams::default();
        let eta = build_eta(&g);
        let mut totals = Vec::new();
        for seed in 0..10 {
            let mut tau = init_pheromone(&g, &params);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (order, cost) = construct_tour(&g, &mut tau, &eta, &params, &mut rng);
            assert!(order.validate(&g).is_ok());
            totals.push(cost.total);
        }
        assert!(totals.iter().all(|&t| t == 27.0));
    }

    // independent greedy-by-eta oracle: from the drawn start, always move
    // to the adjacent unvisited table with the largest static eta
    fn eta_greedy(g: &QueryGraph, eta: &EtaMatrix, start: TableId) -> Vec<TableId> {
        let n = g.n();
        let mut seq = vec![start];
        let mut visited = vec![false; n];
        visited[start] = true;
        while seq.len() < n {
            let cur = *seq.last().unwrap();
            let mut best: Option<(f64, TableId)> = None;
            for u in 0..n {
                if visited[u] || !seq.iter().any(|&p| g.adjacent(p, u)) {
                    continue;
                }
                let e = eta.get(cur, u);
                if best.is_none_or(|(b, _)| e > b) {
                    best = Some((e, u));
                }
            }
            let (_, u) = best.unwrap();
            seq.push(u);
            visited[u] = true;
        }
        seq
    }

    #[test]
    fn pure_exploitation_on_uniform_tau_is_eta_greedy() {
        for seed in 0..25 {
            let g = random_graph(5, 400 + seed);
            let eta = build_eta(&g);
            let params = AcoParams { q0: 1.0, ..Default::default() };
            let mut tau = init_pheromone(&g, &params);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut probe = rng.clone();
            let (order, _) = construct_tour(&g, &mut tau, &eta, &params, &mut rng);
            let start = probe.random_range(0..g.n());
            assert_eq!(order.as_slice(), eta_greedy(&g, &eta, start), "seed {seed}");
        }
    }

    #[test]
    fn constructed_tours_are_always_valid() {
        for seed in 0..30 {
            let g = random_graph(3 + (seed as usize % 6), 500 + seed);
            let params = AcoParams::default();
            let eta = build_eta(&g);
            let mut tau = init_pheromone(&g, &params);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (order, cost) = construct_tour(&g, &mut tau, &eta, &params, &mut rng);
            assert!(order.validate(&g).is_ok());
            assert_eq!(cost.total, cost.steps.iter().sum::<f64>());
        }
    }

    #[test]
    fn optimize_two_tables_is_the_unique_plan() {
        let g = QueryGraph::new(
            vec![TableStats::new(0, "A", 6), TableStats::new(1, "B", 9)],
            vec![JoinEdge::new(0, 1, 0.5)],
        )
        .unwrap();
        let r = optimize(&g, &AcoParams::default()).unwrap();
        assert_eq!(r.best_cost.total, 27.0);
        assert_eq!(r.evaluations, 30 * 2);
    }

    #[test]
    fn optimize_finds_chain_optimum() {
        let g = chain_abc();
        let r = optimize(&g, &AcoParams { seed: 42, ..Default::default() }).unwrap();
        assert_relative_eq!(r.best_cost.total, 1100.0, max_relative = 1e-9);
        assert!(r.best_order.validate(&g).is_ok());
    }

    #[test]
    fn optimize_is_deterministic_in_both_modes() {
        let g = random_graph(8, 600);
        for parallel in [false, true] {
            let params = AcoParams { seed: 99, parallel, ..Default::default() };
            let a = optimize(&g, &params).unwrap();
            let b = optimize(&g, &params).unwrap();
            assert_eq!(a.best_order, b.best_order);
            assert_eq!(a.best_cost, b.best_cost);
            assert_eq!(a.trace, b.trace);
            assert_eq!(a.evaluations, b.evaluations);
        }
    }

    #[test]
    fn trace_is_monotone_and_ends_at_best() {
        let g = random_graph(7, 601);
        let r = optimize(&g, &AcoParams { seed: 5, ..Default::default() }).unwrap();
        assert_eq!(r.trace.len(), 30);
        for w in r.trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert_eq!(*r.trace.last().unwrap(), r.best_cost.total);
    }

    #[test]
    fn bad_params_are_rejected() {
        let g = chain_abc();
        for (params, name) in [
            (AcoParams { rho: 0.0, ..Default::default() }, "rho"),
            (AcoParams { rho: 1.0, ..Default::default() }, "rho"),
            (AcoParams { q0: 1.5, ..Default::default() }, "q0"),
            (AcoParams { beta: f64::NAN, ..Default::default() }, "beta"),
            (AcoParams { iterations: 0, ..Default::default() }, "iterations"),
            (AcoParams { num_ants: Some(0), ..Default::default() }, "num_ants"),
        ] {
            let err = optimize(&g, &params).unwrap_err();
            assert_eq!(err.param, name);
        }
    }
}
