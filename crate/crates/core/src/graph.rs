//! Immutable simple undirected graphs, the degree order, and the counting
//! query oracle through which the estimators see the graph.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::ops::{Add, AddAssign};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("self-loop at line {line}")]
    SelfLoop { line: usize },
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: u64, n: usize },
    #[error("neighbor index {index} out of range for vertex {vertex} of degree {degree}")]
    NeighborIndex {
        vertex: VertexId,
        index: usize,
        degree: usize,
    },
    #[error("order is strict: vertex {0} compared with itself")]
    SameVertex(VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoopEdge(VertexId),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Compressed adjacency: sorted neighbor lists laid out back to back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl Graph {
    /// Builds a simple graph on `n` vertices. Duplicate edges (in either
    /// direction) collapse; self-loops are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut lists: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for (u, v) in edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: x as u64,
                        n,
                    });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoopEdge(u));
            }
            lists[u as usize].push(v);
            lists[v as usize].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for mut list in lists {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        Ok(Self { offsets, targets })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of ordered edges, i.e. the sum of all degrees.
    pub fn m(&self) -> usize {
        self.targets.len()
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        // search the shorter list
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.n() as VertexId
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Degree order: lower degree first, ties by ascending id.
    #[inline]
    pub fn order_cmp(&self, u: VertexId, v: VertexId) -> Ordering {
        (self.degree(u), u).cmp(&(self.degree(v), v))
    }

    pub fn precedes(&self, u: VertexId, v: VertexId) -> Result<bool, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::SameVertex(u));
        }
        Ok(self.order_cmp(u, v) == Ordering::Less)
    }

    pub fn check(&self, v: VertexId) -> Result<(), GraphError> {
        if (v as usize) < self.n() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v as u64,
                n: self.n(),
            })
        }
    }

    /// Writes the graph in edge-list form with an `n <count>` header so that
    /// isolated trailing vertices survive a round trip.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n {}", self.n())?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }
}

/// How the loader treats `u u` lines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LoopPolicy {
    #[default]
    Reject,
    Skip,
}

/// Reads an edge list: one `u v` pair per line, `#` comments, blank lines,
/// and an optional `n <count>` header line.
pub fn load_edge_list<R: BufRead>(reader: R, loops: LoopPolicy) -> Result<Graph, GraphError> {
    let mut declared_n: Option<usize> = None;
    let mut edges = BTreeSet::new();
    let mut max_id: Option<u64> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut fields = body.split_whitespace();
        let first = fields.next().unwrap_or_default();
        let second = fields.next();
        if fields.next().is_some() {
            return Err(parse_err(line_no, "expected two fields"));
        }
        let Some(second) = second else {
            return Err(parse_err(line_no, "expected two fields"));
        };
        if first == "n" {
            let count = second
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, "invalid vertex count"))?;
            declared_n = Some(count);
            continue;
        }
        let u = parse_id(first, line_no)?;
        let v = parse_id(second, line_no)?;
        if u == v {
            match loops {
                LoopPolicy::Reject => return Err(GraphError::SelfLoop { line: line_no }),
                LoopPolicy::Skip => {
                    max_id = max_id.max(Some(u));
                    continue;
                }
            }
        }
        max_id = max_id.max(Some(u.max(v)));
        edges.insert((u.min(v), u.max(v)));
    }

    let observed = max_id.map_or(0, |x| x as usize + 1);
    let n = match declared_n {
        Some(count) if count < observed => {
            return Err(GraphError::VertexOutOfRange {
                vertex: observed as u64 - 1,
                n: count,
            })
        }
        Some(count) => count,
        None => observed,
    };
    if n > VertexId::MAX as usize {
        return Err(GraphError::VertexOutOfRange {
            vertex: n as u64,
            n: VertexId::MAX as usize,
        });
    }
    Graph::from_edges(
        n,
        edges.into_iter().map(|(u, v)| (u as VertexId, v as VertexId)),
    )
}

fn parse_id(field: &str, line: usize) -> Result<u64, GraphError> {
    field
        .parse::<u64>()
        .map_err(|_| parse_err(line, &format!("invalid vertex id {field:?}")))
}

fn parse_err(line: usize, message: &str) -> GraphError {
    GraphError::Parse {
        line,
        message: message.to_string(),
    }
}

/// Per-type query tallies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub degree: u64,
    pub neighbor: u64,
    pub pair: u64,
    pub uniform: u64,
}

impl QueryCounts {
    pub fn total(&self) -> u64 {
        self.degree + self.neighbor + self.pair + self.uniform
    }

    /// Queries made since `earlier` was read off the same oracle.
    pub fn since(&self, earlier: &QueryCounts) -> QueryCounts {
        QueryCounts {
            degree: self.degree - earlier.degree,
            neighbor: self.neighbor - earlier.neighbor,
            pair: self.pair - earlier.pair,
            uniform: self.uniform - earlier.uniform,
        }
    }
}

impl Add for QueryCounts {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            degree: self.degree + rhs.degree,
            neighbor: self.neighbor + rhs.neighbor,
            pair: self.pair + rhs.pair,
            uniform: self.uniform + rhs.uniform,
        }
    }
}

impl AddAssign for QueryCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

/// Read access in the query model. Neighbor indices are 0-based here; the
/// 1-based form lives on [`QueryOracle::neighbor`].
pub trait Probe {
    fn n(&self) -> usize;
    fn degree(&self, v: VertexId) -> usize;
    fn neighbor_at(&self, v: VertexId, index: usize) -> VertexId;
    fn pair(&self, u: VertexId, v: VertexId) -> bool;
    fn uniform_vertex<R: Rng + ?Sized>(&self, rng: &mut R) -> VertexId;
}

/// Counting facade over a [`Graph`]. Each read bumps exactly one counter.
///
/// Counters live in `Cell`s, so an oracle belongs to one worker; parallel
/// trials each build their own and merge [`QueryCounts`] afterwards.
#[derive(Debug)]
pub struct QueryOracle<'g> {
    graph: &'g Graph,
    counts: Cell<QueryCounts>,
}

impl<'g> QueryOracle<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Self {
            graph,
            counts: Cell::new(QueryCounts::default()),
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn counts(&self) -> QueryCounts {
        self.counts.get()
    }

    pub fn reset_counts(&self) {
        self.counts.set(QueryCounts::default());
    }

    #[inline]
    fn bump(&self, f: impl FnOnce(&mut QueryCounts)) {
        let mut c = self.counts.get();
        f(&mut c);
        self.counts.set(c);
    }

    pub fn degree(&self, v: VertexId) -> Result<usize, GraphError> {
        self.graph.check(v)?;
        Ok(Probe::degree(self, v))
    }

    /// The `index`-th neighbor of `v`, counting from 1.
    pub fn neighbor(&self, v: VertexId, index: usize) -> Result<VertexId, GraphError> {
        self.graph.check(v)?;
        let degree = self.graph.degree(v);
        if index == 0 || index > degree {
            return Err(GraphError::NeighborIndex {
                vertex: v,
                index,
                degree,
            });
        }
        Ok(self.neighbor_at(v, index - 1))
    }

    pub fn pair(&self, u: VertexId, v: VertexId) -> Result<bool, GraphError> {
        self.graph.check(u)?;
        self.graph.check(v)?;
        Ok(Probe::pair(self, u, v))
    }
}

impl Probe for QueryOracle<'_> {
    fn n(&self) -> usize {
        self.graph.n()
    }

    #[inline]
    fn degree(&self, v: VertexId) -> usize {
        self.bump(|c| c.degree += 1);
        self.graph.degree(v)
    }

    #[inline]
    fn neighbor_at(&self, v: VertexId, index: usize) -> VertexId {
        self.bump(|c| c.neighbor += 1);
        self.graph.neighbors(v)[index]
    }

    #[inline]
    fn pair(&self, u: VertexId, v: VertexId) -> bool {
        self.bump(|c| c.pair += 1);
        u != v && self.graph.has_edge(u, v)
    }

    fn uniform_vertex<R: Rng + ?Sized>(&self, rng: &mut R) -> VertexId {
        assert!(self.graph.n() > 0, "uniform vertex draw on an empty graph");
        self.bump(|c| c.uniform += 1);
        rng.gen_range(0..self.graph.n()) as VertexId
    }
}

/// Answers from neighbor lists that were already paid for through the
/// oracle; everything else is forwarded to (and charged by) the oracle.
/// Degrees are remembered after their first query.
pub struct LocalView<'o, 'g> {
    oracle: &'o QueryOracle<'g>,
    known: Vec<Cell<bool>>,
    seen_degree: Vec<Cell<bool>>,
    known_edges: Cell<usize>,
}

impl<'o, 'g> LocalView<'o, 'g> {
    pub fn new(oracle: &'o QueryOracle<'g>) -> Self {
        let n = oracle.graph.n();
        Self {
            oracle,
            known: vec![Cell::new(false); n],
            seen_degree: vec![Cell::new(false); n],
            known_edges: Cell::new(0),
        }
    }

    pub fn oracle(&self) -> &'o QueryOracle<'g> {
        self.oracle
    }

    #[inline]
    pub fn is_known(&self, v: VertexId) -> bool {
        self.known[v as usize].get()
    }

    /// Ordered edges held locally.
    pub fn known_edges(&self) -> usize {
        self.known_edges.get()
    }

    /// Fetches the whole neighbor list of `v`: one degree query plus one
    /// neighbor query per entry. Returns the degree.
    pub fn fetch(&self, v: VertexId) -> usize {
        if self.is_known(v) {
            return self.oracle.graph.degree(v);
        }
        let d = Probe::degree(self, v);
        for i in 0..d {
            self.oracle.neighbor_at(v, i);
        }
        self.known[v as usize].set(true);
        self.known_edges.set(self.known_edges.get() + d);
        d
    }
}

impl Probe for LocalView<'_, '_> {
    fn n(&self) -> usize {
        self.oracle.n()
    }

    #[inline]
    fn degree(&self, v: VertexId) -> usize {
        let seen = &self.seen_degree[v as usize];
        if seen.get() {
            self.oracle.graph.degree(v)
        } else {
            seen.set(true);
            Probe::degree(self.oracle, v)
        }
    }

    #[inline]
    fn neighbor_at(&self, v: VertexId, index: usize) -> VertexId {
        if self.is_known(v) {
            self.oracle.graph.neighbors(v)[index]
        } else {
            self.oracle.neighbor_at(v, index)
        }
    }

    #[inline]
    fn pair(&self, u: VertexId, v: VertexId) -> bool {
        if u == v {
            return false;
        }
        if self.is_known(u) || self.is_known(v) {
            self.oracle.graph.has_edge(u, v)
        } else {
            Probe::pair(self.oracle, u, v)
        }
    }

    fn uniform_vertex<R: Rng + ?Sized>(&self, rng: &mut R) -> VertexId {
        self.oracle.uniform_vertex(rng)
    }
}
