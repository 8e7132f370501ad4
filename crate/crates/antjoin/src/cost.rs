//! Cardinality and cost estimation for left-deep join sequences.
//!
//! The cost of a plan is the sum of the cardinalities of all intermediate
//! join results (the C_out metric). Cardinalities follow the textbook
//! independence model: joining a prefix of estimated size `c` with a table
//! of `r` rows under combined selectivity `s` yields `c * r * s` rows. A
//! pair with no join edge contributes selectivity 1.0 (cross product).
//!
//! The ants steer by a *static* pairwise heuristic: `eta(r, u)` is the
//! reciprocal of the cost of joining the two base tables alone. Tours are
//! scored with the sequence-dependent [`tour_cost`].

use std::error::Error;
use std::fmt;

use crate::graph::{validate_permutation, JoinOrder, OrderError, QueryGraph, TableId};

/// Cost of one left-deep plan: per-join intermediate cardinalities and
/// their sum. `steps` has length `n - 1`; the final intermediate is
/// included (it is order-invariant, so it shifts every plan equally).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanCost {
    pub total: f64,
    pub steps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostError {
    SameTable,
    NextAlreadyJoined,
}

impl fmt::Display for CostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostError::SameTable => write!(f, "pairwise join cost needs two distinct tables"),
            CostError::NextAlreadyJoined => {
                write!(f, "next table is already part of the joined prefix")
            }
        }
    }
}

impl Error for CostError {}

/// `left_card * right_card * sel` under the independence model.
pub fn join_cardinality(left_card: f64, right_card: u64, sel: f64) -> f64 {
    left_card * right_card as f64 * sel
}

/// Cost of joining exactly the two base tables `r` and `u`: the product of
/// their cardinalities and the edge selectivity (1.0 when no edge exists).
pub fn pairwise_join_cost(g: &QueryGraph, r: TableId, u: TableId) -> Result<f64, CostError> {
    if r == u {
        return Err(CostError::SameTable);
    }
    Ok(g.rows(r) as f64 * g.rows(u) as f64 * g.selectivity_or_one(r, u))
}

/// Product of the selectivities of all edges between `next` and the members
/// of `prefix`, scanned in prefix order; 1.0 when no such edge exists.
pub fn step_selectivity(
    g: &QueryGraph,
    prefix: &[TableId],
    next: TableId,
) -> Result<f64, CostError> {
    if prefix.contains(&next) {
        return Err(CostError::NextAlreadyJoined);
    }
    Ok(step_selectivity_unchecked(g, prefix, next))
}

#[inline]
pub(crate) fn step_selectivity_unchecked(g: &QueryGraph, prefix: &[TableId], next: TableId) -> f64 {
    let mut sel = 1.0;
    for &p in prefix {
        if g.adjacent(p, next) {
            sel *= g.selectivity_or_one(p, next);
        }
    }
    sel
}

/// Left-deep evaluation of a complete permutation. No validity checks; the
/// callers guarantee `seq` is a permutation of the graph's ids.
pub(crate) fn evaluate_sequence(g: &QueryGraph, seq: &[TableId]) -> PlanCost {
    let mut steps = Vec::with_capacity(seq.len().saturating_sub(1));
    let mut intermediate = g.rows(seq[0]) as f64;
    let mut total = 0.0;
    for k in 1..seq.len() {
        let next = seq[k];
        let sel = step_selectivity_unchecked(g, &seq[..k], next);
        intermediate = join_cardinality(intermediate, g.rows(next), sel);
        steps.push(intermediate);
        total += intermediate;
    }
    PlanCost { total, steps }
}

/// Cost of a connectivity-respecting join order. Rejects orders that fail
/// [`JoinOrder::validate`].
pub fn tour_cost(g: &QueryGraph, order: &JoinOrder) -> Result<PlanCost, OrderError> {
    order.validate(g)?;
    Ok(evaluate_sequence(g, order.as_slice()))
}

/// Cost of any permutation, connectivity-respecting or not. Missing edges
/// cost as cross products.
pub fn tour_cost_relaxed(g: &QueryGraph, order: &JoinOrder) -> Result<PlanCost, OrderError> {
    validate_permutation(g, order.as_slice())?;
    Ok(evaluate_sequence(g, order.as_slice()))
}

/// Static pairwise heuristic: `get(r, u) = 1 / pairwise_join_cost(r, u)`.
/// Symmetric, strictly positive off the diagonal; the diagonal is unused.
#[derive(Debug, Clone)]
pub struct EtaMatrix {
    n: usize,
    values: Vec<f64>,
}

impl EtaMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: TableId, u: TableId) -> f64 {
        self.values[r * self.n + u]
    }
}

/// Builds the static heuristic matrix for a graph.
pub fn build_eta(g: &QueryGraph) -> EtaMatrix {
    let n = g.n();
    let mut values = vec![0.0; n * n];
    for r in 0..n {
        for u in 0..n {
            if r != u {
                let cost = pairwise_join_cost(g, r, u).expect("distinct ids");
                values[r * n + u] = 1.0 / cost;
            }
        }
    }
    EtaMatrix { n, values }
}
