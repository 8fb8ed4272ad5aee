//! Degree-capped simple graphs and the graph d-process.
//!
//! [`CappedGraph`] is the shared data structure: a simple graph on `n`
//! vertices whose degrees never exceed `cap`, with an index of the
//! unsaturated vertices (degree < cap) that supports uniform sampling and
//! O(1) removal. [`GraphProcess`] drives it with the d-process rule: add a
//! uniformly random unused pair of unsaturated vertices until none is left.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::record::{CheckpointKind, CheckpointRow, Checkpoints, Sampler, TrajectoryRecord};
use crate::rng::{rng_from_seed, ProcessRng};

const NOT_INDEXED: u32 = u32::MAX;

/// Counts of the edge and vertex classes that matter near the end of the
/// process.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeClassCounts {
    /// Edges whose endpoints are both unsaturated.
    pub unsaturated_edges: u64,
    /// Edges with one unsaturated endpoint and one critical endpoint.
    pub critical_edges: u64,
    /// Vertices of degree at most `cap - 2`.
    pub critical_vertices: u64,
}

/// Simple graph with a degree cap and an index of unsaturated vertices.
#[derive(Clone, Debug)]
pub struct CappedGraph {
    n: usize,
    cap: usize,
    degrees: Vec<u32>,
    // Row `v` holds the first `degrees[v]` neighbours of `v`.
    adjacency: Vec<u32>,
    unsaturated: Vec<u32>,
    slot: Vec<u32>,
    degree_counts: Vec<u64>,
    edges: u64,
    max_edges: u64,
}

impl CappedGraph {
    pub fn new(n: usize, cap: usize) -> Result<Self> {
        if cap < 2 {
            return Err(invalid(format!("degree cap must be at least 2, got {cap}")));
        }
        if n < 2 {
            return Err(invalid(format!("need at least 2 vertices, got {n}")));
        }
        if n >= NOT_INDEXED as usize {
            return Err(invalid(format!("too many vertices: {n}")));
        }
        let mut degree_counts = vec![0; cap + 1];
        degree_counts[0] = n as u64;
        Ok(Self {
            n,
            cap,
            degrees: vec![0; n],
            adjacency: vec![0; n * cap],
            unsaturated: (0..n as u32).collect(),
            slot: (0..n as u32).collect(),
            degree_counts,
            edges: 0,
            max_edges: (cap as u64 * n as u64) / 2,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn degree(&self, v: u32) -> usize {
        self.degrees[v as usize] as usize
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        let start = v as usize * self.cap;
        &self.adjacency[start..start + self.degrees[v as usize] as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        let (a, b) = if self.degrees[u as usize] <= self.degrees[v as usize] {
            (u, v)
        } else {
            (v, u)
        };
        self.neighbors(a).contains(&b)
    }

    pub fn is_unsaturated(&self, v: u32) -> bool {
        self.slot[v as usize] != NOT_INDEXED
    }

    /// Unsaturated vertices in index order. The order changes as vertices
    /// saturate (swap-remove).
    pub fn unsaturated(&self) -> &[u32] {
        &self.unsaturated
    }

    pub fn unsaturated_count(&self) -> usize {
        self.unsaturated.len()
    }

    /// `D_0..=D_cap`: number of vertices of each degree.
    pub fn degree_counts(&self) -> &[u64] {
        &self.degree_counts
    }

    pub fn edges(&self) -> u64 {
        self.edges
    }

    /// `N = floor(cap * n / 2)`.
    pub fn max_edges(&self) -> u64 {
        self.max_edges
    }

    /// `N - s`.
    pub fn deficit(&self) -> u64 {
        self.max_edges - self.edges
    }

    /// Whether `{u, v}` may be added: distinct, both unsaturated, not yet an edge.
    pub fn is_allowed(&self, u: u32, v: u32) -> bool {
        u != v && self.is_unsaturated(u) && self.is_unsaturated(v) && !self.has_edge(u, v)
    }

    /// Adds `{u, v}` and returns which endpoints became saturated.
    ///
    /// Panics if the pair is not allowed.
    pub fn add_edge(&mut self, u: u32, v: u32) -> (bool, bool) {
        assert!(self.is_allowed(u, v), "pair ({u}, {v}) is not allowed");
        let su = self.attach(u, v);
        let sv = self.attach(v, u);
        self.edges += 1;
        debug_assert!(self.edges <= self.max_edges);
        (su, sv)
    }

    fn attach(&mut self, v: u32, w: u32) -> bool {
        let vi = v as usize;
        let deg = self.degrees[vi] as usize;
        self.adjacency[vi * self.cap + deg] = w;
        self.degree_counts[deg] -= 1;
        self.degree_counts[deg + 1] += 1;
        self.degrees[vi] += 1;
        if deg + 1 == self.cap {
            let at = self.slot[vi] as usize;
            let last = self.unsaturated.pop().expect("unsaturated index is empty");
            if last != v {
                self.unsaturated[at] = last;
                self.slot[last as usize] = at as u32;
            }
            self.slot[vi] = NOT_INDEXED;
            true
        } else {
            false
        }
    }

    /// All allowed pairs, scanning the unsaturated index. O(U^2).
    pub fn allowed_pairs(&self) -> Vec<(u32, u32)> {
        let mut pairs = Vec::new();
        for (i, &u) in self.unsaturated.iter().enumerate() {
            for &v in &self.unsaturated[i + 1..] {
                if !self.has_edge(u, v) {
                    pairs.push((u, v));
                }
            }
        }
        pairs
    }

    /// True when no allowed pair exists.
    ///
    /// The unsaturated vertices induce a graph of maximum degree `cap - 1`,
    /// so more than `cap` of them always leave a non-adjacent pair; the
    /// exhaustive scan only runs when `U <= cap`.
    pub fn is_stuck(&self) -> bool {
        let u = self.unsaturated.len();
        if u > self.cap {
            return false;
        }
        self.unsaturated
            .iter()
            .enumerate()
            .all(|(i, &a)| self.unsaturated[i + 1..].iter().all(|&b| self.has_edge(a, b)))
    }

    pub fn edge_class_counts(&self) -> EdgeClassCounts {
        let critical = |v: u32| self.degree(v) + 2 <= self.cap;
        let mut counts = EdgeClassCounts {
            critical_vertices: self.degree_counts[..self.cap - 1].iter().sum(),
            ..Default::default()
        };
        for &u in &self.unsaturated {
            for &v in self.neighbors(u) {
                if u < v && self.is_unsaturated(v) {
                    counts.unsaturated_edges += 1;
                    if critical(u) || critical(v) {
                        counts.critical_edges += 1;
                    }
                }
            }
        }
        counts
    }

    /// Edge list with `u < v`, sorted.
    pub fn edge_list(&self) -> Vec<[u32; 2]> {
        let mut list: Vec<[u32; 2]> = (0..self.n as u32)
            .flat_map(|u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| [u, v]))
            .collect();
        list.sort_unstable();
        list
    }

    /// Number of vertices of degree at most `j`.
    pub fn low_degree_count(&self, j: usize) -> u64 {
        self.degree_counts[..=j.min(self.cap)].iter().sum()
    }

    /// Checks every structural invariant together with the bounds
    /// `2t/d <= U <= 2t + 1` on the number of unsaturated vertices.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        let mut counts = vec![0u64; self.cap + 1];
        let mut degree_sum = 0u64;
        for v in 0..self.n as u32 {
            let deg = self.degree(v);
            if deg > self.cap {
                return fail(format!("vertex {v} has degree {deg} > {}", self.cap));
            }
            counts[deg] += 1;
            degree_sum += deg as u64;
            if self.is_unsaturated(v) != (deg < self.cap) {
                return fail(format!("unsaturated index disagrees with degree of vertex {v}"));
            }
            let nbrs = self.neighbors(v);
            for (i, &w) in nbrs.iter().enumerate() {
                if w == v {
                    return fail(format!("self-loop at {v}"));
                }
                if nbrs[i + 1..].contains(&w) {
                    return fail(format!("repeated edge {{{v}, {w}}}"));
                }
                if !self.neighbors(w).contains(&v) {
                    return fail(format!("asymmetric adjacency {v} -> {w}"));
                }
            }
        }
        if counts != self.degree_counts {
            return fail("degree counts out of sync".into());
        }
        if degree_sum != 2 * self.edges {
            return fail(format!("degree sum {degree_sum} != 2s = {}", 2 * self.edges));
        }
        if self.edges > self.max_edges {
            return fail("more than N edges".into());
        }
        for (i, &v) in self.unsaturated.iter().enumerate() {
            if self.slot[v as usize] as usize != i {
                return fail(format!("slot of vertex {v} is stale"));
            }
        }
        check_unsaturated_bounds(self.unsaturated.len() as u64, self.deficit(), self.cap as u64)
    }
}

/// `2t/d <= U <= 2t + 1`.
pub fn check_unsaturated_bounds(unsaturated: u64, deficit: u64, cap: u64) -> Result<()> {
    if cap * unsaturated < 2 * deficit || unsaturated > 2 * deficit + 1 {
        return Err(Error::Invariant(format!(
            "unsaturated count {unsaturated} outside [2t/d, 2t+1] at t = {deficit}, d = {cap}"
        )));
    }
    Ok(())
}

/// Tracks `S_j`, the last edge count at which some vertex had degree at
/// most `j`, for `j = 0..d-1`. The minimum degree never decreases, so `S_j`
/// is fixed the moment no vertex of degree `<= j` is left.
#[derive(Clone, Debug)]
pub(crate) struct LastLowDegree {
    slots: Vec<Option<u64>>,
}

impl LastLowDegree {
    pub(crate) fn new(cap: usize) -> Self {
        Self { slots: vec![None; cap - 1] }
    }

    /// Call after every added edge.
    pub(crate) fn update(&mut self, graph: &CappedGraph) {
        let s = graph.edges();
        for (j, slot) in self.slots.iter_mut().enumerate() {
            if slot.is_none() && graph.low_degree_count(j) == 0 {
                *slot = Some(s - 1);
            }
        }
    }

    pub(crate) fn values(&self, graph: &CappedGraph) -> Vec<u64> {
        self.slots.iter().map(|x| x.unwrap_or(graph.edges())).collect()
    }
}

/// Result of one call to [`GraphProcess::step`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    AddedEdge(u32, u32),
    Stuck,
}

/// How a final graph ended.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturationOutcome {
    pub saturated: bool,
    /// Final degrees below the cap, ascending.
    pub unsaturated_degrees: Vec<u32>,
    pub final_edges: u64,
}

/// Classifies a stuck graph. A final graph is saturated when at most one
/// vertex misses the cap, and that vertex has degree `cap - 1`.
pub fn classify_final(graph: &CappedGraph) -> Result<SaturationOutcome> {
    if !graph.is_stuck() {
        return Err(Error::NotStuck);
    }
    let mut unsaturated_degrees: Vec<u32> =
        graph.unsaturated().iter().map(|&v| graph.degree(v) as u32).collect();
    unsaturated_degrees.sort_unstable();
    let saturated = match unsaturated_degrees.as_slice() {
        [] => true,
        [deg] => *deg as usize == graph.cap() - 1,
        _ => false,
    };
    Ok(SaturationOutcome {
        saturated,
        unsaturated_degrees,
        final_edges: graph.edges(),
    })
}

/// Below this many unsaturated vertices a step enumerates the allowed pairs
/// instead of rejection sampling.
fn enumeration_threshold(cap: usize) -> usize {
    2 * cap
}

/// The graph d-process `P(d, n)`.
///
/// Each step adds a pair chosen uniformly among the unused pairs of
/// unsaturated vertices. With more than `2d` unsaturated vertices the pair is
/// drawn by rejection: two uniform positions in the unsaturated index, kept
/// if distinct and non-adjacent. Since every unsaturated vertex has at most
/// `d - 1` neighbours, a draw is rejected with probability at most `d / U`.
/// With `U <= 2d` the allowed pairs are listed and one is picked directly.
#[derive(Clone, Debug)]
pub struct GraphProcess {
    graph: CappedGraph,
    rng: ProcessRng,
    seed: u64,
    stuck: bool,
    last_low_degree: LastLowDegree,
}

impl GraphProcess {
    pub fn new(n: usize, d: usize, seed: u64) -> Result<Self> {
        let graph = CappedGraph::new(n, d)?;
        Ok(Self {
            graph,
            rng: rng_from_seed(seed),
            seed,
            stuck: false,
            last_low_degree: LastLowDegree::new(d),
        })
    }

    pub fn graph(&self) -> &CappedGraph {
        &self.graph
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn d(&self) -> usize {
        self.graph.cap()
    }

    pub fn edges(&self) -> u64 {
        self.graph.edges()
    }

    pub fn max_edges(&self) -> u64 {
        self.graph.max_edges()
    }

    pub fn deficit(&self) -> u64 {
        self.graph.deficit()
    }

    pub fn unsaturated_count(&self) -> usize {
        self.graph.unsaturated_count()
    }

    pub fn degree_counts(&self) -> &[u64] {
        self.graph.degree_counts()
    }

    pub fn edge_class_counts(&self) -> EdgeClassCounts {
        self.graph.edge_class_counts()
    }

    pub fn is_stuck(&self) -> bool {
        self.stuck
    }

    /// Adds one uniformly random allowed edge, or reports that none exists.
    pub fn step(&mut self) -> StepOutcome {
        if self.stuck {
            return StepOutcome::Stuck;
        }
        let (u, v) = match sample_allowed_pair(&self.graph, &mut self.rng) {
            Some(pair) => pair,
            None => {
                self.stuck = true;
                return StepOutcome::Stuck;
            }
        };
        self.graph.add_edge(u, v);
        self.last_low_degree.update(&self.graph);
        StepOutcome::AddedEdge(u, v)
    }

    /// `S_j` for `j = 0..d-1`: the last edge count at which some vertex had
    /// degree at most `j`. Entries not yet determined report the current
    /// edge count.
    pub fn last_low_degree(&self) -> Vec<u64> {
        self.last_low_degree.values(&self.graph)
    }

    pub fn classify_final(&self) -> Result<SaturationOutcome> {
        classify_final(&self.graph)
    }

    /// Runs to the end, recording a row at every requested edge count and
    /// deficit. With `validate` set, `2t/d <= U <= 2t + 1` is checked after
    /// every step and the full structural check runs at both ends.
    pub fn run(&mut self, checkpoints: &Checkpoints, validate: bool) -> Result<TrajectoryRecord> {
        let n_max = self.graph.max_edges();
        let mut targets: Vec<(u64, CheckpointKind, u64)> = Vec::new();
        for &s in &checkpoints.s {
            if s > n_max {
                return Err(invalid(format!("edge checkpoint {s} exceeds N = {n_max}")));
            }
            targets.push((s, CheckpointKind::Edges, s));
        }
        for &t in &checkpoints.t {
            if t > n_max {
                return Err(invalid(format!("deficit checkpoint {t} exceeds N = {n_max}")));
            }
            targets.push((n_max - t, CheckpointKind::Deficit, t));
        }
        if !checkpoints.m.is_empty() {
            return Err(invalid("ball-count checkpoints need a bin sampler"));
        }
        targets.sort_by_key(|&(s, kind, _)| (s, kind));

        let mut rows = Vec::with_capacity(targets.len());
        let mut next = 0;
        if validate {
            self.graph.check_invariants()?;
        }
        loop {
            let s = self.graph.edges();
            while next < targets.len() && targets[next].0 == s {
                let (_, kind, target) = targets[next];
                rows.push(self.snapshot(kind, target));
                next += 1;
            }
            match self.step() {
                StepOutcome::AddedEdge(..) => {
                    if validate {
                        check_unsaturated_bounds(
                            self.graph.unsaturated_count() as u64,
                            self.graph.deficit(),
                            self.d() as u64,
                        )?;
                    }
                }
                StepOutcome::Stuck => break,
            }
        }
        if validate {
            self.graph.check_invariants()?;
        }
        rows.extend(targets[next..].iter().map(|&(_, kind, target)| CheckpointRow::unreached(kind, target)));

        let outcome = self.classify_final()?;
        if validate && outcome.unsaturated_degrees.len() > self.d() {
            return Err(Error::Invariant("more than d unsaturated vertices at the end".into()));
        }
        Ok(TrajectoryRecord {
            terminal_edges: (self.n() <= 16).then(|| self.graph.edge_list()),
            last_low_degree: self.last_low_degree(),
            ..TrajectoryRecord::new(Sampler::Graph, self.n(), self.d(), self.seed, outcome, rows)
        })
    }

    fn snapshot(&self, kind: CheckpointKind, target: u64) -> CheckpointRow {
        let classes = self.graph.edge_class_counts();
        CheckpointRow {
            s: Some(self.graph.edges()),
            t: Some(self.graph.deficit()),
            degree_counts: self.graph.degree_counts().to_vec(),
            unsaturated_vertices: Some(self.graph.unsaturated_count() as u64),
            unsaturated_edges: Some(classes.unsaturated_edges),
            critical_edges: Some(classes.critical_edges),
            critical_vertices: Some(classes.critical_vertices),
            ..CheckpointRow::reached(kind, target)
        }
    }
}

/// Uniform allowed pair, or `None` when the graph is stuck.
pub(crate) fn sample_allowed_pair(graph: &CappedGraph, rng: &mut ProcessRng) -> Option<(u32, u32)> {
    let unsat = graph.unsaturated();
    let u = unsat.len();
    if u <= enumeration_threshold(graph.cap()) {
        let pairs = graph.allowed_pairs();
        if pairs.is_empty() {
            return None;
        }
        return Some(pairs[rng.gen_range(0..pairs.len())]);
    }
    loop {
        let a = rng.gen_range(0..u);
        let b = rng.gen_range(0..u);
        if a == b {
            continue;
        }
        let (x, y) = (unsat[a], unsat[b]);
        if !graph.has_edge(x, y) {
            return Some((x, y));
        }
    }
}
