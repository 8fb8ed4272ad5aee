//! The bin d-process and its bin-graph process.
//!
//! Balls are dropped into `n` bins uniformly at random. A bin is unsaturated
//! while it holds fewer than `d` good balls. Balls landing in unsaturated
//! bins are numbered; consecutive numbered balls form pairs. A pair is good
//! when its two bins are distinct and no earlier pair used the same two
//! bins, and each good pair becomes an edge of the embedded graph.
//!
//! A bad pair with distinct bins can only repeat a bin pair that is already
//! an edge: the earliest pair on any bin pair is good unless its bins
//! coincide. "No earlier pair on these bins" is therefore the same test as
//! "not yet an edge", and the embedded graph's membership check decides
//! goodness.
//!
//! Two execution modes share the classification logic:
//!
//! * faithful: every ball is drawn (one uniform draw per ball);
//! * accelerated: the run of unnumbered balls before the next numbered one
//!   is drawn as a geometric variate by inverse transform on one uniform
//!   `f64` (omitted while every bin is unsaturated), then the numbered ball
//!   is placed uniformly among the unsaturated bins (one more draw).
//!
//! Unnumbered balls only land in bins that already hold at least `d` balls,
//! so `Y_0..Y_{d-1}`, the count of bins with `>= d` balls, and every other
//! tracked statistic agree between modes. Only the per-bin totals of
//! saturated bins go stale in accelerated mode.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::graph::{check_unsaturated_bounds, classify_final, CappedGraph, LastLowDegree, SaturationOutcome};
use crate::record::{CheckpointKind, CheckpointRow, Checkpoints, Sampler, TrajectoryRecord};
use crate::rng::{rng_from_seed, ProcessRng};

/// What happened to one numbered or unnumbered ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallEvent {
    /// Landed in a saturated bin.
    Unnumbered(u32),
    /// Numbered, now waiting for a partner.
    Waiting(u32),
    /// Completed a good pair (waiting bin, new bin); the edge was added.
    GoodPair(u32, u32),
    /// Completed a bad pair (waiting bin, new bin).
    BadPair(u32, u32),
}

/// State of the bin d-process.
#[derive(Clone, Debug)]
pub struct BinProcess {
    graph: CappedGraph,
    rng: ProcessRng,
    seed: u64,
    mode: Sampler,
    balls: Vec<u32>,
    bad_in_bin: Vec<u32>,
    // Y_0..Y_{d-1}, then bins with >= d balls.
    ball_counts: Vec<u64>,
    m: u64,
    numbered: u64,
    bad: u64,
    waiting: Option<u32>,
    bad_unsaturated: u64,
    // Sum over unsaturated bins of max(0, balls - d).
    overflow_unsaturated: u64,
    // 2 L(m) = sum over bins of min(balls, d).
    twice_l: u64,
    bad_pairs_by_deficit: BTreeMap<u64, u64>,
    stuck: bool,
    last_low_degree: LastLowDegree,
}

/// Quantities at the last step spent at a deficit.
#[derive(Clone, Debug, PartialEq)]
pub struct DeficitSnapshot {
    pub t: u64,
    pub s: u64,
    pub m: u64,
    pub degree_counts: Vec<u64>,
    pub ball_counts: Vec<u64>,
    pub bad: u64,
    pub bad_unsaturated: u64,
    pub waiting: bool,
    pub twice_l: u64,
    pub overflow_unsaturated: u64,
}

impl DeficitSnapshot {
    /// Checks `2s = 2L - B~ - w + O`, where `w` is 1 with a waiting ball and
    /// `O` is the number of balls beyond the `d`-th in unsaturated bins.
    /// With `O = 0` this is `s = L - B~/2 - w/2`.
    pub fn check_edge_identity(&self) -> Result<()> {
        let rhs = self.twice_l as i128 - self.bad_unsaturated as i128 - self.waiting as i128
            + self.overflow_unsaturated as i128;
        if 2 * self.s as i128 != rhs {
            return Err(Error::Invariant(format!(
                "2s = {} but 2L - B~ - w + O = {rhs} at t = {}",
                2 * self.s,
                self.t
            )));
        }
        Ok(())
    }
}

impl BinProcess {
    /// `mode` must be [`Sampler::Faithful`] or [`Sampler::Accelerated`].
    pub fn new(n: usize, d: usize, seed: u64, mode: Sampler) -> Result<Self> {
        if !mode.is_bins() {
            return Err(invalid("bin process mode must be faithful or accelerated"));
        }
        let graph = CappedGraph::new(n, d)?;
        let mut ball_counts = vec![0; d + 1];
        ball_counts[0] = n as u64;
        Ok(Self {
            graph,
            rng: rng_from_seed(seed),
            seed,
            mode,
            balls: vec![0; n],
            bad_in_bin: vec![0; n],
            ball_counts,
            m: 0,
            numbered: 0,
            bad: 0,
            waiting: None,
            bad_unsaturated: 0,
            overflow_unsaturated: 0,
            twice_l: 0,
            bad_pairs_by_deficit: BTreeMap::new(),
            stuck: false,
            last_low_degree: LastLowDegree::new(d),
        })
    }

    pub fn graph(&self) -> &CappedGraph {
        &self.graph
    }

    pub fn mode(&self) -> Sampler {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn d(&self) -> usize {
        self.graph.cap()
    }

    /// Balls dropped.
    pub fn balls_dropped(&self) -> u64 {
        self.m
    }

    pub fn numbered(&self) -> u64 {
        self.numbered
    }

    /// Good balls, `2s`.
    pub fn good(&self) -> u64 {
        2 * self.graph.edges()
    }

    pub fn bad(&self) -> u64 {
        self.bad
    }

    pub fn unnumbered(&self) -> u64 {
        self.m - self.numbered
    }

    pub fn waiting(&self) -> Option<u32> {
        self.waiting
    }

    pub fn bad_unsaturated(&self) -> u64 {
        self.bad_unsaturated
    }

    /// `T(m) = N - (good balls) / 2`.
    pub fn deficit(&self) -> u64 {
        self.graph.deficit()
    }

    /// Total balls in bin `b`; stale for saturated bins in accelerated mode.
    pub fn bin_total(&self, b: u32) -> u32 {
        self.balls[b as usize]
    }

    /// Good balls in bin `b`, equal to its degree.
    pub fn bin_good(&self, b: u32) -> u32 {
        self.graph.degree(b) as u32
    }

    /// `Y_0..Y_{d-1}` followed by the number of bins with at least `d` balls.
    pub fn y_counts(&self) -> &[u64] {
        &self.ball_counts
    }

    /// `2 L(m)`, an integer.
    pub fn twice_l(&self) -> u64 {
        self.twice_l
    }

    /// `L(m) = dn/2 - (1/2) sum_{i<d} (d - i) Y_i(m)`.
    pub fn l_of_m(&self) -> f64 {
        self.twice_l as f64 / 2.0
    }

    pub fn bad_pairs_by_deficit(&self) -> &BTreeMap<u64, u64> {
        &self.bad_pairs_by_deficit
    }

    pub fn is_stuck(&self) -> bool {
        self.stuck
    }

    pub fn classify_final(&self) -> Result<SaturationOutcome> {
        classify_final(&self.graph)
    }

    /// Drops one ball into a uniformly random bin.
    pub fn drop_ball(&mut self) -> BallEvent {
        let b = self.rng.gen_range(0..self.graph.n()) as u32;
        if self.graph.is_unsaturated(b) {
            self.place_numbered(b)
        } else {
            self.place_unnumbered(Some(b), 1);
            BallEvent::Unnumbered(b)
        }
    }

    /// Skips the unnumbered balls before the next numbered one and places
    /// that one. Returns the number of skipped balls with the event.
    pub fn accelerated_step(&mut self) -> Result<(u64, BallEvent)> {
        let (skip, b) = self.draw_numbered_placement()?;
        self.place_unnumbered(None, skip);
        Ok((skip, self.place_numbered(b)))
    }

    fn draw_skip(&mut self) -> u64 {
        let u = self.graph.unsaturated_count();
        let n = self.graph.n();
        if u == n {
            return 0;
        }
        let p = u as f64 / n as f64;
        let x: f64 = self.rng.gen();
        let k = ((-x).ln_1p() / (-p).ln_1p()).floor();
        if k.is_finite() && k < u64::MAX as f64 {
            k as u64
        } else {
            u64::MAX
        }
    }

    /// Unnumbered balls to skip, then the bin of the next numbered ball.
    fn draw_numbered_placement(&mut self) -> Result<(u64, u32)> {
        let u = self.graph.unsaturated_count();
        if u == 0 {
            return Err(Error::AllSaturated);
        }
        let skip = self.draw_skip();
        let i = self.rng.gen_range(0..u);
        Ok((skip, self.graph.unsaturated()[i]))
    }

    fn place_unnumbered(&mut self, bin: Option<u32>, count: u64) {
        if let Some(b) = bin {
            self.balls[b as usize] += count as u32;
        }
        self.m += count;
    }

    /// Whether a numbered ball in bin `b` would complete a good pair.
    fn completes_good_pair(&self, b: u32) -> bool {
        matches!(self.waiting, Some(w) if w != b && !self.graph.has_edge(w, b))
    }

    fn add_ball(&mut self, b: u32) {
        let d = self.graph.cap();
        let old = self.balls[b as usize] as usize;
        self.balls[b as usize] += 1;
        self.m += 1;
        if old < d {
            self.ball_counts[old] -= 1;
            self.ball_counts[old + 1] += 1;
            self.twice_l += 1;
        } else if self.graph.is_unsaturated(b) {
            self.overflow_unsaturated += 1;
        }
    }

    fn place_numbered(&mut self, b: u32) -> BallEvent {
        debug_assert!(self.graph.is_unsaturated(b));
        self.add_ball(b);
        self.numbered += 1;
        let Some(w) = self.waiting.take() else {
            self.waiting = Some(b);
            return BallEvent::Waiting(b);
        };
        if w != b && !self.graph.has_edge(w, b) {
            let (sat_w, sat_b) = self.graph.add_edge(w, b);
            if sat_w {
                self.on_saturated(w);
            }
            if sat_b {
                self.on_saturated(b);
            }
            self.last_low_degree.update(&self.graph);
            if self.graph.unsaturated_count() <= self.graph.cap() && self.graph.is_stuck() {
                self.stuck = true;
            }
            BallEvent::GoodPair(w, b)
        } else {
            self.bad += 2;
            self.bad_in_bin[w as usize] += 1;
            self.bad_in_bin[b as usize] += 1;
            self.bad_unsaturated += 2;
            *self.bad_pairs_by_deficit.entry(self.graph.deficit()).or_insert(0) += 1;
            BallEvent::BadPair(w, b)
        }
    }

    fn on_saturated(&mut self, b: u32) {
        let d = self.graph.cap() as u32;
        self.bad_unsaturated -= self.bad_in_bin[b as usize] as u64;
        self.overflow_unsaturated -= self.balls[b as usize].saturating_sub(d) as u64;
    }

    fn deficit_snapshot(&self) -> DeficitSnapshot {
        DeficitSnapshot {
            t: self.graph.deficit(),
            s: self.graph.edges(),
            m: self.m,
            degree_counts: self.graph.degree_counts().to_vec(),
            ball_counts: self.ball_counts.clone(),
            bad: self.bad,
            bad_unsaturated: self.bad_unsaturated,
            waiting: self.waiting.is_some(),
            twice_l: self.twice_l,
            overflow_unsaturated: self.overflow_unsaturated,
        }
    }

    fn row(&self, kind: CheckpointKind, target: u64, m: u64) -> CheckpointRow {
        let classes = self.graph.edge_class_counts();
        CheckpointRow {
            s: Some(self.graph.edges()),
            t: Some(self.graph.deficit()),
            m: Some(m),
            degree_counts: self.graph.degree_counts().to_vec(),
            ball_counts: Some(self.ball_counts.clone()),
            bad: Some(self.bad),
            bad_unsaturated: Some(self.bad_unsaturated),
            waiting: Some(self.waiting.is_some()),
            unsaturated_vertices: Some(self.graph.unsaturated_count() as u64),
            unsaturated_edges: Some(classes.unsaturated_edges),
            critical_edges: Some(classes.critical_edges),
            critical_vertices: Some(classes.critical_vertices),
            ..CheckpointRow::reached(kind, target)
        }
    }

    /// Cheap per-step checks: `|Y_i - D_i| <= B + 1` for `i < d`, the ball
    /// classification partition, and `2t/d <= U <= 2t + 1`.
    pub fn check_step_invariants(&self) -> Result<()> {
        let d = self.graph.cap();
        let degrees = self.graph.degree_counts();
        for (i, (&y, &deg)) in self.ball_counts[..d].iter().zip(degrees).enumerate() {
            let gap = y.abs_diff(deg);
            if gap > self.bad + 1 {
                return Err(Error::Invariant(format!(
                    "|Y_{i} - D_{i}| = {gap} exceeds B + 1 = {}",
                    self.bad + 1
                )));
            }
        }
        let waiting = self.waiting.is_some() as u64;
        if self.good() + self.bad + waiting + self.unnumbered() != self.m {
            return Err(Error::Invariant("ball classification does not partition the balls".into()));
        }
        check_unsaturated_bounds(self.graph.unsaturated_count() as u64, self.deficit(), d as u64)
    }

    /// Full O(n) recomputation of every incrementally maintained quantity.
    pub fn check_invariants(&self) -> Result<()> {
        self.graph.check_invariants()?;
        self.check_step_invariants()?;
        let d = self.graph.cap();
        let fail = |msg: &str| Err(Error::Invariant(msg.to_string()));
        let mut counts = vec![0u64; d + 1];
        let (mut twice_l, mut bad_unsat, mut overflow, mut bad) = (0u64, 0u64, 0u64, 0u64);
        for b in 0..self.graph.n() as u32 {
            let total = self.balls[b as usize] as usize;
            counts[total.min(d)] += 1;
            twice_l += total.min(d) as u64;
            bad += self.bad_in_bin[b as usize] as u64;
            let good = self.graph.degree(b);
            if self.graph.is_unsaturated(b) {
                bad_unsat += self.bad_in_bin[b as usize] as u64;
                overflow += total.saturating_sub(d) as u64;
                let waiting_here = (self.waiting == Some(b)) as usize;
                if total != good + self.bad_in_bin[b as usize] as usize + waiting_here {
                    return fail("unsaturated bin holds an unnumbered ball");
                }
            } else if self.mode == Sampler::Faithful && total < d {
                return fail("saturated bin with fewer than d balls");
            }
        }
        if counts != self.ball_counts {
            return fail("ball counts out of sync");
        }
        if twice_l != self.twice_l || bad_unsat != self.bad_unsaturated || overflow != self.overflow_unsaturated {
            return fail("L, B~ or overflow out of sync");
        }
        if bad != self.bad {
            return fail("bad ball tally out of sync");
        }
        if let Some(w) = self.waiting {
            if !self.graph.is_unsaturated(w) {
                return fail("waiting ball in a saturated bin");
            }
        }
        Ok(())
    }

    /// Runs until the embedded graph is stuck.
    ///
    /// Rows at ball counts record the state after `m` balls. Rows at deficit
    /// `t` record the last step spent at `t`, which is finalized when the
    /// good pair that lowers the deficit arrives (or at termination). With
    /// `validate` set, [`Self::check_step_invariants`] runs after every ball
    /// and the edge identity of [`DeficitSnapshot`] is checked at every
    /// deficit.
    pub fn run(&mut self, checkpoints: &Checkpoints, validate: bool) -> Result<TrajectoryRecord> {
        let n_max = self.graph.max_edges();
        let mut s_targets: Vec<(u64, CheckpointKind, u64)> = Vec::new();
        for &s in &checkpoints.s {
            if s > n_max {
                return Err(invalid(format!("edge checkpoint {s} exceeds N = {n_max}")));
            }
            s_targets.push((s, CheckpointKind::Edges, s));
        }
        for &t in &checkpoints.t {
            if t > n_max {
                return Err(invalid(format!("deficit checkpoint {t} exceeds N = {n_max}")));
            }
            s_targets.push((n_max - t, CheckpointKind::Deficit, t));
        }
        s_targets.sort_by_key(|&(s, kind, _)| (s, kind));
        let mut m_targets = checkpoints.m.clone();
        m_targets.sort_unstable();
        m_targets.dedup();

        let mut s_rows = Vec::new();
        let mut m_rows = Vec::new();
        let mut next_s = 0;
        let mut next_m = 0;

        while next_m < m_targets.len() && m_targets[next_m] == 0 {
            m_rows.push(self.row(CheckpointKind::Balls, 0, 0));
            next_m += 1;
        }
        if validate {
            self.check_invariants()?;
        }
        loop {
            let b = match self.mode {
                Sampler::Accelerated => {
                    let (skip, b) = self.draw_numbered_placement()?;
                    let end = self.m.saturating_add(skip);
                    while next_m < m_targets.len() && m_targets[next_m] <= end {
                        let target = m_targets[next_m];
                        m_rows.push(self.row(CheckpointKind::Balls, target, target));
                        next_m += 1;
                    }
                    self.place_unnumbered(None, skip);
                    b
                }
                _ => {
                    let b = self.rng.gen_range(0..self.graph.n()) as u32;
                    if !self.graph.is_unsaturated(b) {
                        self.place_unnumbered(Some(b), 1);
                        if next_m < m_targets.len() && m_targets[next_m] == self.m {
                            m_rows.push(self.row(CheckpointKind::Balls, self.m, self.m));
                            next_m += 1;
                        }
                        continue;
                    }
                    b
                }
            };
            if self.completes_good_pair(b) {
                let s = self.graph.edges();
                if validate {
                    self.deficit_snapshot().check_edge_identity()?;
                }
                while next_s < s_targets.len() && s_targets[next_s].0 == s {
                    let (_, kind, target) = s_targets[next_s];
                    s_rows.push(self.row(kind, target, self.m));
                    next_s += 1;
                }
            }
            self.place_numbered(b);
            if next_m < m_targets.len() && m_targets[next_m] == self.m {
                m_rows.push(self.row(CheckpointKind::Balls, self.m, self.m));
                next_m += 1;
            }
            if validate {
                self.check_step_invariants()?;
            }
            if self.stuck {
                break;
            }
        }
        // Last step at the final deficit is the final state.
        if validate {
            self.deficit_snapshot().check_edge_identity()?;
            self.check_invariants()?;
        }
        let s = self.graph.edges();
        while next_s < s_targets.len() && s_targets[next_s].0 == s {
            let (_, kind, target) = s_targets[next_s];
            s_rows.push(self.row(kind, target, self.m));
            next_s += 1;
        }
        let mut rows = m_rows;
        rows.extend(
            m_targets[next_m..].iter().map(|&m| CheckpointRow::unreached(CheckpointKind::Balls, m)),
        );
        rows.extend(s_rows);
        rows.extend(s_targets[next_s..].iter().map(|&(_, kind, target)| CheckpointRow::unreached(kind, target)));

        let outcome = self.classify_final()?;
        Ok(TrajectoryRecord {
            last_low_degree: self.last_low_degree.values(&self.graph),
            bad_final: Some(self.bad),
            balls_at_end: Some(self.m),
            bad_pairs_by_deficit: Some(self.bad_pairs_by_deficit.clone()),
            terminal_edges: (self.n() <= 16).then(|| self.graph.edge_list()),
            ..TrajectoryRecord::new(self.mode, self.n(), self.d(), self.seed, outcome, rows)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn process(n: usize, d: usize, seed: u64, mode: Sampler) -> BinProcess {
        BinProcess::new(n, d, seed, mode).unwrap()
    }

    #[test]
    fn fresh_state() {
        let p = process(5, 2, 0, Sampler::Faithful);
        assert_eq!(p.graph().max_edges(), 5);
        assert_eq!(p.graph().unsaturated_count(), 5);
        assert_eq!(p.y_counts(), &[5, 0, 0]);
        assert_eq!(p.l_of_m(), 0.0);
        assert_eq!(p.deficit(), 5);
        assert!(BinProcess::new(5, 2, 0, Sampler::Graph).is_err());
    }

    #[test]
    fn first_and_second_ball() {
        let (mut good, mut bad) = (false, false);
        for seed in 0..200 {
            let mut p = process(5, 2, seed, Sampler::Faithful);
            let BallEvent::Waiting(b) = p.drop_ball() else { panic!("first ball must wait") };
            assert_eq!(p.numbered(), 1);
            assert_eq!(p.bin_total(b), 1);
            assert_eq!(p.y_counts(), &[4, 1, 0]);
            match p.drop_ball() {
                BallEvent::GoodPair(w, c) => {
                    assert_ne!(w, c);
                    assert!(p.graph().has_edge(w, c));
                    assert_eq!(p.deficit(), 4);
                    assert_eq!(p.bad(), 0);
                    good = true;
                }
                BallEvent::BadPair(w, c) => {
                    assert_eq!(w, c);
                    assert_eq!(p.bad(), 2);
                    assert_eq!(p.deficit(), 5);
                    assert_eq!(p.bad_pairs_by_deficit().get(&5), Some(&1));
                    bad = true;
                }
                other => panic!("unexpected {other:?}"),
            }
        }
        assert!(good && bad);
    }

    #[test]
    fn every_ball_keeps_every_invariant() {
        for (mode, seed) in [(Sampler::Faithful, 1), (Sampler::Accelerated, 2), (Sampler::Faithful, 3)] {
            let mut p = process(30, 3, seed, mode);
            let mut last_l = 0;
            let mut last_t = p.deficit();
            while !p.is_stuck() {
                match mode {
                    Sampler::Faithful => {
                        p.drop_ball();
                    }
                    _ => {
                        p.accelerated_step().unwrap();
                    }
                }
                p.check_invariants().unwrap();
                assert_eq!(p.y_counts().iter().sum::<u64>(), 30);
                assert!(p.twice_l() >= last_l);
                assert!(p.deficit() <= last_t && last_t - p.deficit() <= 1);
                last_l = p.twice_l();
                last_t = p.deficit();
            }
            let twice_bad_pairs: u64 = p.bad_pairs_by_deficit().values().map(|w| 2 * w).sum();
            assert_eq!(twice_bad_pairs, p.bad());
        }
    }

    #[test]
    fn validated_runs_succeed() {
        for (n, d) in [(2, 2), (3, 2), (7, 3), (40, 2), (41, 3), (60, 4)] {
            let big_n = (n * d / 2) as u64;
            let cps = Checkpoints {
                s: [0, 10, 40].into_iter().filter(|&s| s <= big_n).collect(),
                t: [0, 1, 2, 5, 20].into_iter().filter(|&t| t <= big_n).collect(),
                m: vec![0, 1, 50, 500],
            };
            for mode in [Sampler::Faithful, Sampler::Accelerated] {
                for seed in 0..5 {
                    let rec = process(n, d, seed, mode).run(&cps, true).unwrap();
                    assert_eq!(rec.sampler, mode);
                    assert_eq!(rec.bad_final.unwrap() % 2, 0);
                }
            }
        }
    }

    #[test]
    fn two_bins_give_a_single_edge() {
        for mode in [Sampler::Faithful, Sampler::Accelerated] {
            for seed in 0..20 {
                let rec = process(2, 2, seed, mode).run(&Checkpoints::default(), true).unwrap();
                assert_eq!(rec.terminal_edges, Some(vec![[0, 1]]));
                assert!(!rec.saturated);
                assert_eq!(rec.unsaturated_degrees, vec![1, 1]);
            }
        }
    }

    #[test]
    fn zero_ball_checkpoint() {
        let cps = Checkpoints { m: vec![0], ..Default::default() };
        for mode in [Sampler::Faithful, Sampler::Accelerated] {
            let rec = process(9, 3, 4, mode).run(&cps, false).unwrap();
            let row = rec.row(CheckpointKind::Balls, 0).unwrap();
            assert_eq!(row.ball_counts.as_deref(), Some(&[9, 0, 0, 0][..]));
            assert_eq!(row.t, Some(13));
            assert_eq!(row.m, Some(0));
        }
    }

    #[test]
    fn ball_checkpoints_land_on_their_target() {
        let cps = Checkpoints { m: vec![3, 17, 100, 1000, 1 << 40], ..Default::default() };
        for mode in [Sampler::Faithful, Sampler::Accelerated] {
            let rec = process(20, 2, 9, mode).run(&cps, true).unwrap();
            for row in rec.checkpoints.iter().filter(|r| r.reached) {
                assert_eq!(row.m, Some(row.target));
                assert_eq!(row.ball_counts.as_ref().unwrap().iter().sum::<u64>(), 20);
            }
            assert!(rec.row(CheckpointKind::Balls, 1 << 40).is_none());
            assert!(rec.checkpoints.iter().any(|r| r.target == 1 << 40 && !r.reached));
        }
    }

    #[test]
    fn without_bad_pairs_no_bad_balls_in_unsaturated_bins() {
        let cps = Checkpoints { t: (0..=10).collect(), ..Default::default() };
        let mut seen = 0;
        for seed in 0..300 {
            let rec = process(12, 2, seed, Sampler::Accelerated).run(&cps, false).unwrap();
            if rec.bad_final == Some(0) {
                seen += 1;
                for row in rec.checkpoints.iter().filter(|r| r.reached) {
                    assert_eq!(row.bad_unsaturated, Some(0));
                }
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn all_unsaturated_means_no_skip() {
        let mut p = process(50, 3, 5, Sampler::Accelerated);
        for _ in 0..10 {
            let (skip, _) = p.accelerated_step().unwrap();
            assert_eq!(skip, 0);
        }
    }

    #[test]
    fn single_unsaturated_bin_skip_is_geometric() {
        // A 4-cycle saturates bins 0..4 and leaves bin 4 alone.
        let mut p = process(5, 2, 11, Sampler::Accelerated);
        for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            p.graph.add_edge(u, v);
        }
        assert_eq!(p.graph.unsaturated(), &[4]);
        let draws = 100_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            let (skip, b) = p.draw_numbered_placement().unwrap();
            assert_eq!(b, 4);
            sum += skip as f64;
        }
        // Failures before the first success at p = 1/5: mean 4, variance 20.
        let se = (20.0f64 / draws as f64).sqrt();
        assert!((sum / draws as f64 - 4.0).abs() < 5.0 * se);
    }

    #[test]
    fn all_saturated_is_rejected() {
        let mut p = process(3, 2, 0, Sampler::Accelerated);
        for (u, v) in [(0, 1), (1, 2), (2, 0)] {
            p.graph.add_edge(u, v);
        }
        assert!(matches!(p.accelerated_step(), Err(Error::AllSaturated)));
    }

    #[test]
    fn modes_agree_on_four_bins() {
        // The final graph has 3 edges with probability 4/15.
        let trials = 20_000u64;
        let sigma = (4.0 / 15.0 * 11.0 / 15.0 / trials as f64).sqrt();
        for mode in [Sampler::Faithful, Sampler::Accelerated] {
            let short = (0..trials)
                .filter(|&seed| process(4, 2, seed, mode).run(&Checkpoints::default(), false).unwrap().final_edges == 3)
                .count();
            let freq = short as f64 / trials as f64;
            assert!((freq - 4.0 / 15.0).abs() < 5.0 * sigma, "{mode}: {freq}");
        }
    }

    #[test]
    fn same_seed_same_record() {
        let cps = Checkpoints { s: vec![5], t: vec![1, 3], m: vec![10, 200] };
        for mode in [Sampler::Faithful, Sampler::Accelerated] {
            let a = process(33, 3, 77, mode).run(&cps, false).unwrap();
            let b = process(33, 3, 77, mode).run(&cps, false).unwrap();
            assert_eq!(a, b);
        }
    }
}
