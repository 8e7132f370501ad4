//! Query graphs: tables, join edges, and join orders.
//!
//! A multi-way join is modeled as a weighted graph. Each base table is a
//! node, each joinable pair of tables an undirected edge carrying the join
//! predicate's selectivity. A [`JoinOrder`] is an open path through that
//! graph visiting every node once; it encodes a left-deep plan.

use std::collections::HashMap;
use std::error::Error;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense table index, `0..n-1` within one graph.
pub type TableId = usize;

/// A base relation: dense id, display name, and row count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableStats {
    pub id: TableId,
    pub name: String,
    /// Row count, at least 1.
    pub rows: u64,
}

impl TableStats {
    pub fn new(id: TableId, name: impl Into<String>, rows: u64) -> Self {
        TableStats { id, name: name.into(), rows }
    }
}

/// An undirected joinable pair with the fraction of the cross product
/// surviving the join predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinEdge {
    pub a: TableId,
    pub b: TableId,
    /// In `(0, 1]`.
    pub selectivity: f64,
}

impl JoinEdge {
    pub fn new(a: TableId, b: TableId, selectivity: f64) -> Self {
        JoinEdge { a, b, selectivity }
    }
}

/// Violation of a graph invariant, reported in validation order.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    TooFewTables { n: usize },
    NonContiguousIds { position: usize, found: TableId },
    DuplicateTable { name: String },
    BadCardinality { table: String },
    EdgeOutOfRange { id: TableId },
    SelfJoin { table: TableId },
    BadSelectivity { a: TableId, b: TableId, selectivity: f64 },
    DuplicateEdge { a: TableId, b: TableId },
    Disconnected { table: TableId },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::TooFewTables { n } => {
                write!(f, "a query graph needs at least 2 tables, got {n}")
            }
            GraphError::NonContiguousIds { position, found } => {
                write!(f, "table at position {position} has id {found}, ids must be 0..n-1 in order")
            }
            GraphError::DuplicateTable { name } => write!(f, "duplicate table name {name:?}"),
            GraphError::BadCardinality { table } => {
                write!(f, "table {table:?} has cardinality 0, row counts must be at least 1")
            }
            GraphError::EdgeOutOfRange { id } => {
                write!(f, "join edge references unknown table id {id}")
            }
            GraphError::SelfJoin { table } => write!(f, "self-join edge on table id {table}"),
            GraphError::BadSelectivity { a, b, selectivity } => {
                write!(f, "edge {a}-{b} has selectivity {selectivity}, must be in (0, 1]")
            }
            GraphError::DuplicateEdge { a, b } => {
                write!(f, "more than one join edge between tables {a} and {b}")
            }
            GraphError::Disconnected { table } => {
                write!(f, "graph is disconnected: table id {table} is unreachable from table 0")
            }
        }
    }
}

impl Error for GraphError {}

/// Tables plus join edges; the instance every optimizer in this crate runs on.
///
/// Construction validates all invariants, so a `QueryGraph` value is always
/// valid: at least two tables, contiguous ids, positive cardinalities,
/// selectivities in `(0, 1]`, no self or duplicate edges, and connected.
/// Values are immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct QueryGraph {
    tables: Vec<TableStats>,
    edges: Vec<JoinEdge>,
    // n*n caches derived from `edges`
    adjacent: Vec<bool>,
    selectivity: Vec<f64>,
    neighbors: Vec<Vec<TableId>>,
}

impl PartialEq for QueryGraph {
    fn eq(&self, other: &Self) -> bool {
        self.tables == other.tables && self.edges == other.edges
    }
}

impl QueryGraph {
    /// Validates the parts and builds the graph. The error names the first
    /// violated invariant in a fixed validation order.
    pub fn new(tables: Vec<TableStats>, edges: Vec<JoinEdge>) -> Result<Self, GraphError> {
        let n = tables.len();
        if n < 2 {
            return Err(GraphError::TooFewTables { n });
        }
        for (i, t) in tables.iter().enumerate() {
            if t.id != i {
                return Err(GraphError::NonContiguousIds { position: i, found: t.id });
            }
        }
        let mut seen_names = HashMap::new();
        for t in &tables {
            if seen_names.insert(t.name.as_str(), ()).is_some() {
                return Err(GraphError::DuplicateTable { name: t.name.clone() });
            }
        }
        for t in &tables {
            if t.rows == 0 {
                return Err(GraphError::BadCardinality { table: t.name.clone() });
            }
        }

        let mut adjacent = vec![false; n * n];
        let mut selectivity = vec![1.0; n * n];
        for e in &edges {
            if e.a >= n {
                return Err(GraphError::EdgeOutOfRange { id: e.a });
            }
            if e.b >= n {
                return Err(GraphError::EdgeOutOfRange { id: e.b });
            }
            if e.a == e.b {
                return Err(GraphError::SelfJoin { table: e.a });
            }
            if !(e.selectivity > 0.0 && e.selectivity <= 1.0) {
                return Err(GraphError::BadSelectivity {
                    a: e.a,
                    b: e.b,
                    selectivity: e.selectivity,
                });
            }
            if adjacent[e.a * n + e.b] {
                return Err(GraphError::DuplicateEdge { a: e.a.min(e.b), b: e.a.max(e.b) });
            }
            adjacent[e.a * n + e.b] = true;
            adjacent[e.b * n + e.a] = true;
            selectivity[e.a * n + e.b] = e.selectivity;
            selectivity[e.b * n + e.a] = e.selectivity;
        }

        let mut neighbors = vec![Vec::new(); n];
        for t in 0..n {
            for u in 0..n {
                if adjacent[t * n + u] {
                    neighbors[t].push(u);
                }
            }
        }

        // BFS reachability from table 0
        let mut reached = vec![false; n];
        let mut queue = vec![0];
        reached[0] = true;
        while let Some(t) = queue.pop() {
            for &u in &neighbors[t] {
                if !reached[u] {
                    reached[u] = true;
                    queue.push(u);
                }
            }
        }
        if let Some(t) = reached.iter().position(|r| !r) {
            return Err(GraphError::Disconnected { table: t });
        }

        Ok(QueryGraph { tables, edges, adjacent, selectivity, neighbors })
    }

    pub fn n(&self) -> usize {
        self.tables.len()
    }

    pub fn tables(&self) -> &[TableStats] {
        &self.tables
    }

    pub fn edges(&self) -> &[JoinEdge] {
        &self.edges
    }

    pub fn table(&self, id: TableId) -> &TableStats {
        &self.tables[id]
    }

    pub fn rows(&self, id: TableId) -> u64 {
        self.tables[id].rows
    }

    pub fn name(&self, id: TableId) -> &str {
        &self.tables[id].name
    }

    pub fn adjacent(&self, r: TableId, u: TableId) -> bool {
        self.adjacent[r * self.n() + u]
    }

    /// Selectivity of the edge between `r` and `u`, or `None` if the pair is
    /// not joinable. At the cost level a missing edge behaves as a cross
    /// product (selectivity 1.0); callers that need that convention use
    /// [`QueryGraph::selectivity_or_one`].
    pub fn selectivity(&self, r: TableId, u: TableId) -> Option<f64> {
        if self.adjacent(r, u) {
            Some(self.selectivity[r * self.n() + u])
        } else {
            None
        }
    }

    pub fn selectivity_or_one(&self, r: TableId, u: TableId) -> f64 {
        self.selectivity[r * self.n() + u]
    }

    pub fn neighbors(&self, t: TableId) -> &[TableId] {
        &self.neighbors[t]
    }

    pub fn table_named(&self, name: &str) -> Option<TableId> {
        self.tables.iter().position(|t| t.name == name)
    }
}

/// Failure to turn a JSON document into a valid graph.
#[derive(Debug)]
pub enum ParseError {
    /// Malformed JSON.
    Syntax(String),
    /// Well-formed JSON that does not match the document schema.
    Schema(String),
    /// Schema-valid document describing an invalid graph.
    Graph(GraphError),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseError::Schema(msg) => write!(f, "schema error: {msg}"),
            ParseError::Graph(e) => write!(f, "invalid graph: {e}"),
        }
    }
}

impl Error for ParseError {}

impl From<GraphError> for ParseError {
    fn from(e: GraphError) -> Self {
        ParseError::Graph(e)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    tables: Vec<TableDoc>,
    joins: Vec<JoinDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    name: String,
    rows: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JoinDoc {
    left: String,
    right: String,
    selectivity: f64,
}

impl QueryGraph {
    /// Parses the query-graph JSON document. Table order in the file defines
    /// ids `0..n-1`; joins reference tables by name. Unknown keys are
    /// rejected.
    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let doc: GraphDoc = serde_json::from_str(text).map_err(|e| {
            use serde_json::error::Category;
            match e.classify() {
                Category::Data => ParseError::Schema(e.to_string()),
                _ => ParseError::Syntax(e.to_string()),
            }
        })?;

        let tables: Vec<TableStats> = doc
            .tables
            .iter()
            .enumerate()
            .map(|(i, t)| TableStats::new(i, t.name.clone(), t.rows))
            .collect();
        let name_to_id: HashMap<&str, TableId> =
            doc.tables.iter().enumerate().map(|(i, t)| (t.name.as_str(), i)).collect();
        if name_to_id.len() != doc.tables.len() {
            // surfaced as a graph error with a precise name below
            return Err(QueryGraph::new(tables, vec![]).unwrap_err().into());
        }

        let mut edges = Vec::with_capacity(doc.joins.len());
        for j in &doc.joins {
            let a = *name_to_id
                .get(j.left.as_str())
                .ok_or_else(|| ParseError::Schema(format!("unknown table {:?} in joins", j.left)))?;
            let b = *name_to_id.get(j.right.as_str()).ok_or_else(|| {
                ParseError::Schema(format!("unknown table {:?} in joins", j.right))
            })?;
            edges.push(JoinEdge::new(a, b, j.selectivity));
        }

        Ok(QueryGraph::new(tables, edges)?)
    }

    /// Renders the document form of this graph. `from_json(to_json(g))`
    /// reproduces `g` structurally.
    pub fn to_json(&self) -> String {
        let doc = GraphDoc {
            tables: self
                .tables
                .iter()
                .map(|t| TableDoc { name: t.name.clone(), rows: t.rows })
                .collect(),
            joins: self
                .edges
                .iter()
                .map(|e| JoinDoc {
                    left: self.tables[e.a].name.clone(),
                    right: self.tables[e.b].name.clone(),
                    selectivity: e.selectivity,
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("graph document serializes");
        out.push('\n');
        out
    }
}

/// Violation of a join-order invariant against a specific graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderError {
    NotAPermutation,
    /// The table at this position is not adjacent to any earlier table.
    ConnectivityViolation { position: usize },
}

impl fmt::Display for OrderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderError::NotAPermutation => {
                write!(f, "join order is not a permutation of the graph's table ids")
            }
            OrderError::ConnectivityViolation { position } => write!(
                f,
                "join order breaks connectivity at position {position}: the table joins nothing before it"
            ),
        }
    }
}

impl Error for OrderError {}

/// A permutation of table ids encoding a left-deep plan; the open tour of
/// the mapped traveling-salesperson instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinOrder {
    seq: Vec<TableId>,
}

impl JoinOrder {
    pub fn new(seq: Vec<TableId>) -> Self {
        JoinOrder { seq }
    }

    pub fn as_slice(&self) -> &[TableId] {
        &self.seq
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// Checks that the sequence is an exact permutation of `0..n-1` and that
    /// every table after the first is adjacent to at least one table before
    /// it.
    pub fn validate(&self, g: &QueryGraph) -> Result<(), OrderError> {
        validate_permutation(g, &self.seq)?;
        for k in 1..self.seq.len() {
            let next = self.seq[k];
            if !self.seq[..k].iter().any(|&p| g.adjacent(p, next)) {
                return Err(OrderError::ConnectivityViolation { position: k });
            }
        }
        Ok(())
    }
}

impl fmt::Display for JoinOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.seq.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

pub(crate) fn validate_permutation(g: &QueryGraph, seq: &[TableId]) -> Result<(), OrderError> {
    let n = g.n();
    if seq.len() != n {
        return Err(OrderError::NotAPermutation);
    }
    let mut seen = vec![false; n];
    for &t in seq {
        if t >= n || seen[t] {
            return Err(OrderError::NotAPermutation);
        }
        seen[t] = true;
    }
    Ok(())
}
