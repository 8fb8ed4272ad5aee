//! Per-trial trajectory records, the unit of output of every simulator.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::SaturationOutcome;

/// Version stamped on every JSONL record. Bump on any field change.
pub const SCHEMA_VERSION: u32 = 1;

/// Which simulator produced a record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    /// Direct graph d-process.
    Graph,
    /// Bin d-process, one ball per draw.
    Faithful,
    /// Bin d-process with geometric skipping over balls that land in
    /// saturated bins.
    Accelerated,
}

impl Sampler {
    pub fn is_bins(self) -> bool {
        !matches!(self, Sampler::Graph)
    }
}

impl std::str::FromStr for Sampler {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "graph" => Ok(Sampler::Graph),
            "faithful" => Ok(Sampler::Faithful),
            "accelerated" => Ok(Sampler::Accelerated),
            other => Err(format!("unknown sampler `{other}` (graph|faithful|accelerated)")),
        }
    }
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sampler::Graph => "graph",
            Sampler::Faithful => "faithful",
            Sampler::Accelerated => "accelerated",
        })
    }
}

/// Where along a trajectory a checkpoint sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckpointKind {
    /// Edge count `s`.
    Edges,
    /// Deficit `t = N - s`; bin samplers record the last step at that deficit.
    Deficit,
    /// Balls dropped `m` (bin samplers only).
    Balls,
}

/// Requested checkpoints. Values need not be sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoints {
    pub s: Vec<u64>,
    pub t: Vec<u64>,
    pub m: Vec<u64>,
}

impl Checkpoints {
    pub fn is_empty(&self) -> bool {
        self.s.is_empty() && self.t.is_empty() && self.m.is_empty()
    }
}

/// Snapshot of a trajectory at one checkpoint. Fields that a sampler does
/// not track, and every field of an unreached checkpoint, are `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRow {
    pub kind: CheckpointKind,
    pub target: u64,
    /// False when the process stopped before this checkpoint.
    pub reached: bool,
    pub s: Option<u64>,
    pub t: Option<u64>,
    /// Balls dropped so far; at a deficit checkpoint this is `M(t)`.
    pub m: Option<u64>,
    /// `D_0..=D_d`. Empty when unreached.
    pub degree_counts: Vec<u64>,
    /// `Y_0..Y_{d-1}` followed by the number of bins holding at least `d` balls.
    pub ball_counts: Option<Vec<u64>>,
    /// Bad balls so far.
    pub bad: Option<u64>,
    /// Bad balls sitting in unsaturated bins.
    pub bad_unsaturated: Option<u64>,
    pub waiting: Option<bool>,
    pub unsaturated_vertices: Option<u64>,
    pub unsaturated_edges: Option<u64>,
    pub critical_edges: Option<u64>,
    pub critical_vertices: Option<u64>,
}

impl CheckpointRow {
    pub fn reached(kind: CheckpointKind, target: u64) -> Self {
        Self {
            kind,
            target,
            reached: true,
            s: None,
            t: None,
            m: None,
            degree_counts: Vec::new(),
            ball_counts: None,
            bad: None,
            bad_unsaturated: None,
            waiting: None,
            unsaturated_vertices: None,
            unsaturated_edges: None,
            critical_edges: None,
            critical_vertices: None,
        }
    }

    pub fn unreached(kind: CheckpointKind, target: u64) -> Self {
        Self { reached: false, ..Self::reached(kind, target) }
    }
}

/// Everything recorded about one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub schema_version: u32,
    pub trial: u64,
    pub seed: u64,
    pub sampler: Sampler,
    pub n: usize,
    pub d: usize,
    pub final_edges: u64,
    /// Negation of the non-saturation event.
    pub saturated: bool,
    /// Final degrees below `d`, ascending.
    pub unsaturated_degrees: Vec<u32>,
    /// Rows in trajectory order within each kind; unreached rows last.
    pub checkpoints: Vec<CheckpointRow>,
    /// `S_j` for `j = 0..d-1`: last edge count at which the minimum degree
    /// was at most `j`.
    pub last_low_degree: Vec<u64>,
    /// Total bad balls at termination (bin samplers).
    pub bad_final: Option<u64>,
    /// Balls dropped at termination (bin samplers).
    pub balls_at_end: Option<u64>,
    /// Bad pairs created at each deficit, zero entries omitted (bin samplers).
    pub bad_pairs_by_deficit: Option<BTreeMap<u64, u64>>,
    /// Final edge list, kept for graphs on at most 16 vertices.
    pub terminal_edges: Option<Vec<[u32; 2]>>,
}

impl TrajectoryRecord {
    pub fn new(
        sampler: Sampler,
        n: usize,
        d: usize,
        seed: u64,
        outcome: SaturationOutcome,
        checkpoints: Vec<CheckpointRow>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            trial: 0,
            seed,
            sampler,
            n,
            d,
            final_edges: outcome.final_edges,
            saturated: outcome.saturated,
            unsaturated_degrees: outcome.unsaturated_degrees,
            checkpoints,
            last_low_degree: Vec::new(),
            bad_final: None,
            balls_at_end: None,
            bad_pairs_by_deficit: None,
            terminal_edges: None,
        }
    }

    /// First reached row of the given kind and target.
    pub fn row(&self, kind: CheckpointKind, target: u64) -> Option<&CheckpointRow> {
        self.checkpoints.iter().find(|r| r.kind == kind && r.target == target && r.reached)
    }

    /// Final deficit `N - final_edges`.
    pub fn final_deficit(&self) -> u64 {
        (self.d as u64 * self.n as u64) / 2 - self.final_edges
    }
}
