//! Reproducible multi-trial experiments.
//!
//! Trial `i` is seeded with [`trial_seed`]`(base_seed, i)` and owns its
//! simulator, so any number of workers produces the same records. Trials run
//! in fixed-size chunks on a rayon pool; each chunk is collected in trial
//! order before it is written and aggregated, which keeps every output byte
//! independent of the worker count.
//!
//! Per-trial records go to a JSONL file (a header line, one line per trial
//! tagged `"record": "trial"`, and a footer line whose `complete` flag is
//! false if the run failed) or to a CSV file (one row per checkpoint row;
//! the last line is a `#footer` comment). The aggregate report is a long
//! table with the columns of [`REPORT_CSV_HEADER`].

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analytics::AnalyticModel;
use crate::bins::BinProcess;
use crate::error::{invalid, Error, Result};
use crate::graph::GraphProcess;
use crate::oracle::{format_rational, Oracle};
use crate::record::{CheckpointKind, Checkpoints, Sampler, TrajectoryRecord, SCHEMA_VERSION};
use crate::rng::{trial_seed, RNG_ALGORITHM, SEED_MIXER};
use crate::stats::{tv_distance, EmpiricalPmf, Poisson, Proportion, RunningMoments};

/// Trials per parallel chunk. Fixed so that output never depends on the
/// worker count.
pub const CHUNK_TRIALS: u64 = 512;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "DPROC_WORKERS";

/// Columns of the aggregate CSV.
///
/// * `metric`: what `value` measures (see [`ReportRow`]);
/// * `t`, `s`, `j`, `k`: deficit, edge count, degree and moment order when relevant;
/// * `reference`: the predicted or exact value `value` is compared with;
/// * `lower`, `upper`: a confidence interval or acceptance band;
/// * `samples`: observations behind `value`;
/// * `exact`: exact rational reference, when known;
/// * `label`: free-form key (terminal graph, degree multiset, window width).
pub const REPORT_CSV_HEADER: &str = "kind,n,d,metric,t,s,j,k,value,reference,lower,upper,samples,exact,label";

/// Header of the per-trial CSV.
pub const TRIAL_CSV_HEADER: &str = "trial,seed,sampler,final_edges,saturated,unsaturated_degrees,last_low_degree,bad_final,balls_at_end,checkpoint_kind,target,reached,s,t,m,degree_counts,ball_counts,bad,bad_unsaturated,waiting,unsaturated_vertices,unsaturated_edges,critical_edges,critical_vertices";

/// What an experiment measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Terminal-graph frequencies against the exact oracle.
    Equivalence,
    /// Degree counts mid-process against `beta_j(ell^{-1}(s))`.
    DegreeProfile,
    /// Law of `D_j(N - t)` against `Po(f_j)`.
    TailPoisson,
    /// Factorial moments of `D_j(N - t)` against `f_j^k`.
    TailMoments,
    /// Probability of failing to saturate.
    Saturation,
    /// Bad-ball totals and bad balls in unsaturated bins.
    Badballs,
    /// `P(S_j < N - t)` against `exp(-f_j)`.
    Survival,
    /// Frequency of unsaturated edges at deficit `floor(log^{1-eps} n)`.
    IndeptCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Equivalence,
        ExperimentKind::DegreeProfile,
        ExperimentKind::TailPoisson,
        ExperimentKind::TailMoments,
        ExperimentKind::Saturation,
        ExperimentKind::Badballs,
        ExperimentKind::Survival,
        ExperimentKind::IndeptCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Equivalence => "equivalence",
            ExperimentKind::DegreeProfile => "degree-profile",
            ExperimentKind::TailPoisson => "tail-poisson",
            ExperimentKind::TailMoments => "tail-moments",
            ExperimentKind::Saturation => "saturation",
            ExperimentKind::Badballs => "badballs",
            ExperimentKind::Survival => "survival",
            ExperimentKind::IndeptCheck => "indept-check",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment kind `{s}`"))
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Format of the per-trial output file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Jsonl,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(OutputFormat::Jsonl),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format `{other}` (jsonl|csv)")),
        }
    }
}

/// Full description of an experiment. Missing checkpoints and sampler get
/// kind-specific defaults (see [`ExperimentConfig::plan`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    pub d: usize,
    pub trials: u64,
    pub base_seed: u64,
    pub mode: Option<Sampler>,
    pub checkpoints_s: Vec<u64>,
    pub checkpoints_t: Vec<u64>,
    pub checkpoints_m: Vec<u64>,
    /// Per-trial records; nothing is written when absent.
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    /// Aggregate CSV; nothing is written when absent.
    pub report: Option<PathBuf>,
    /// Worker threads; defaults to `DPROC_WORKERS` or the number of CPUs.
    pub workers: Option<usize>,
    /// Exponent in the deficit `floor(log^{1-eps} n)` of the indept-check.
    pub epsilon: f64,
    /// Window half-width multiplier `w` of the degree-profile check.
    pub window_w: f64,
    /// Largest factorial moment order in tail-moments.
    pub max_moment: u32,
    /// Normal quantile used for confidence intervals.
    pub z: f64,
    /// Check every structural invariant after every step.
    pub validate: bool,
    pub oracle_budget: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Saturation,
            n: 1000,
            d: 2,
            trials: 100,
            base_seed: 0,
            mode: None,
            checkpoints_s: Vec::new(),
            checkpoints_t: Vec::new(),
            checkpoints_m: Vec::new(),
            output: None,
            format: OutputFormat::Jsonl,
            report: None,
            workers: None,
            epsilon: 0.2,
            window_w: 5.0,
            max_moment: 2,
            z: 1.96,
            validate: false,
            oracle_budget: crate::oracle::DEFAULT_STATE_BUDGET,
        }
    }
}

/// A validated configuration with defaults filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub config: ExperimentConfig,
    pub sampler: Sampler,
    pub checkpoints: Checkpoints,
    pub model: AnalyticModel,
    pub workers: usize,
}

fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Deficit `floor((log n)^{1 - eps})`.
pub fn indept_deficit(n: usize, epsilon: f64) -> u64 {
    (n as f64).ln().powf(1.0 - epsilon).floor().max(0.0) as u64
}

/// Deficits at which `f_j` is closest to each target, at least 1.
pub fn deficits_for_f(model: &AnalyticModel, j: usize, targets: &[f64]) -> Result<Vec<u64>> {
    targets
        .iter()
        .map(|&f| Ok((model.deficit_for_f(f, j)?.round() as u64).max(1)))
        .collect()
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, n: usize, d: usize, trials: u64, base_seed: u64) -> Self {
        Self { kind, n, d, trials, base_seed, ..Default::default() }
    }

    /// Validates the configuration and fills kind-specific defaults.
    pub fn plan(&self) -> Result<Plan> {
        if self.trials < 1 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.n < 2 || self.d < 2 {
            return Err(invalid(format!("need n >= 2 and d >= 2, got n = {}, d = {}", self.n, self.d)));
        }
        let model = AnalyticModel::new(self.n, self.d)?;
        let big_n = model.max_edges();
        let sampler = match (self.kind, self.mode) {
            (ExperimentKind::Badballs, Some(Sampler::Graph)) => {
                return Err(invalid("badballs needs a bin sampler (faithful|accelerated)"))
            }
            (_, Some(mode)) => mode,
            (ExperimentKind::Badballs | ExperimentKind::Equivalence, None) => Sampler::Accelerated,
            (_, None) => Sampler::Graph,
        };
        if !self.checkpoints_m.is_empty() && !sampler.is_bins() {
            return Err(invalid("ball-count checkpoints need a bin sampler"));
        }
        let mut checkpoints = Checkpoints {
            s: self.checkpoints_s.clone(),
            t: self.checkpoints_t.clone(),
            m: self.checkpoints_m.clone(),
        };
        let log_n = model.log_n();
        match self.kind {
            ExperimentKind::Equivalence => {
                if self.n > crate::oracle::MAX_VERTICES {
                    return Err(invalid(format!(
                        "equivalence needs n <= {}",
                        crate::oracle::MAX_VERTICES
                    )));
                }
            }
            ExperimentKind::DegreeProfile if checkpoints.s.is_empty() => {
                checkpoints.s = [0.5, 0.8, 0.95].iter().map(|f| (f * big_n as f64).floor() as u64).collect();
            }
            ExperimentKind::TailPoisson | ExperimentKind::TailMoments if checkpoints.t.is_empty() => {
                checkpoints.t = vec![(2.0 * log_n).ceil() as u64];
            }
            ExperimentKind::Survival if checkpoints.t.is_empty() => {
                checkpoints.t = deficits_for_f(&model, 0, &[0.5, 1.0, 2.0, 4.0])?;
            }
            ExperimentKind::IndeptCheck => {
                if !(0.0..1.0).contains(&self.epsilon) {
                    return Err(invalid("epsilon must lie in [0, 1)"));
                }
                let t = indept_deficit(self.n, self.epsilon);
                if !checkpoints.t.contains(&t) {
                    checkpoints.t.push(t);
                }
            }
            ExperimentKind::Badballs if checkpoints.t.is_empty() => {
                checkpoints.t = [1, 10, 100, 1000].into_iter().filter(|&t| t <= big_n).collect();
            }
            _ => {}
        }
        for &s in &checkpoints.s {
            if s > big_n {
                return Err(invalid(format!("edge checkpoint {s} exceeds N = {big_n}")));
            }
        }
        for &t in &checkpoints.t {
            if t > big_n {
                return Err(invalid(format!("deficit checkpoint {t} exceeds N = {big_n}")));
            }
        }
        checkpoints.s.sort_unstable();
        checkpoints.s.dedup();
        checkpoints.t.sort_unstable();
        checkpoints.t.dedup();
        checkpoints.m.sort_unstable();
        checkpoints.m.dedup();
        let workers = self.workers.filter(|&w| w > 0).unwrap_or_else(default_workers);
        Ok(Plan { config: self.clone(), sampler, checkpoints, model, workers })
    }
}

/// Runs trial `trial` of a plan.
pub fn run_trial(plan: &Plan, trial: u64) -> Result<TrajectoryRecord> {
    let cfg = &plan.config;
    let seed = trial_seed(cfg.base_seed, trial);
    let mut record = match plan.sampler {
        Sampler::Graph => GraphProcess::new(cfg.n, cfg.d, seed)?.run(&plan.checkpoints, cfg.validate)?,
        mode => BinProcess::new(cfg.n, cfg.d, seed, mode)?.run(&plan.checkpoints, cfg.validate)?,
    };
    record.trial = trial;
    Ok(record)
}

/// Runs every trial in order and hands each record to `sink`.
pub fn for_each_record(plan: &Plan, mut sink: impl FnMut(TrajectoryRecord) -> Result<()>) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    let trials = plan.config.trials;
    let mut start = 0;
    while start < trials {
        let end = (start + CHUNK_TRIALS).min(trials);
        let chunk: Vec<Result<TrajectoryRecord>> =
            pool.install(|| (start..end).into_par_iter().map(|i| run_trial(plan, i)).collect());
        for (i, record) in (start..end).zip(chunk) {
            let record = record.map_err(|e| Error::Trial { trial: i, source: Box::new(e) })?;
            sink(record)?;
        }
        start = end;
    }
    Ok(())
}

/// Runs every trial and returns the records in trial order.
pub fn collect_records(plan: &Plan) -> Result<Vec<TrajectoryRecord>> {
    let mut out = Vec::with_capacity(plan.config.trials as usize);
    for_each_record(plan, |r| {
        out.push(r);
        Ok(())
    })?;
    Ok(out)
}

/// One line of the aggregate report.
///
/// Metrics by experiment kind:
///
/// * equivalence: `terminal_class` (label = edge list; value = frequency,
///   reference = exact probability, bounds = 5 binomial standard
///   deviations), `max_abs_z`, `nonsat`;
/// * degree-profile: `window_coverage` (reference = `beta_j`, label = `w`),
///   `mean`, `sd_over_sqrt_beta`;
/// * tail-poisson: `tv_poisson` (reference = `f_j`), `pmf` (k = value,
///   reference = Poisson probability), `unreached`;
/// * tail-moments: `factorial_moment` (reference = `f_j^k`), `moment_ratio`;
/// * saturation: `nonsat` (Wilson bounds; reference = the asymptotic
///   prediction for the parity of `dn`), `nonsat_scaled`, `unsat_profile`
///   (label = final degrees below `d`);
/// * badballs: `bad_final_mean`, `bad_final_over_log_n`, `bad_unsaturated_mean`;
/// * survival: `survival` (reference = `exp(-f_j)`, Wilson bounds);
/// * indept-check: `unsaturated_edge_freq`, `critical_edge_freq`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub metric: String,
    pub t: Option<u64>,
    pub s: Option<u64>,
    pub j: Option<usize>,
    pub k: Option<u64>,
    pub value: f64,
    pub reference: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub samples: u64,
    pub exact: Option<String>,
    pub label: Option<String>,
}

impl ReportRow {
    fn new(metric: &str, value: f64, samples: u64) -> Self {
        Self { metric: metric.to_string(), value, samples, ..Default::default() }
    }
}

/// Aggregate result of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub kind: ExperimentKind,
    pub n: usize,
    pub d: usize,
    pub trials: u64,
    pub base_seed: u64,
    pub sampler: Sampler,
    pub rng: String,
    pub seed_mixer: String,
    pub rows: Vec<ReportRow>,
}

impl AggregateReport {
    /// Rows with the given metric.
    pub fn metric<'a>(&'a self, metric: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        fn opt<T: std::fmt::Display>(x: &Option<T>) -> String {
            x.as_ref().map(|v| v.to_string()).unwrap_or_default()
        }
        let mut out = String::from(REPORT_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.kind,
                self.n,
                self.d,
                r.metric,
                opt(&r.t),
                opt(&r.s),
                opt(&r.j),
                opt(&r.k),
                r.value,
                opt(&r.reference),
                opt(&r.lower),
                opt(&r.upper),
                r.samples,
                opt(&r.exact),
                opt(&r.label),
            );
        }
        out
    }
}

/// Streaming reduction of trial records into an [`AggregateReport`].
#[derive(Clone, Debug)]
pub struct Aggregator {
    plan: Plan,
    nonsat: Proportion,
    terminal: std::collections::BTreeMap<Vec<[u32; 2]>, u64>,
    unsat_profiles: std::collections::BTreeMap<Vec<u32>, u64>,
    // Keyed by (checkpoint, j).
    coverage: std::collections::BTreeMap<(u64, usize), (Proportion, RunningMoments)>,
    tail: std::collections::BTreeMap<(u64, usize), EmpiricalPmf>,
    unreached: std::collections::BTreeMap<u64, u64>,
    survival: std::collections::BTreeMap<(u64, usize), Proportion>,
    bad_final: RunningMoments,
    bad_unsat: std::collections::BTreeMap<u64, RunningMoments>,
    unsat_edges: std::collections::BTreeMap<u64, (Proportion, Proportion)>,
}

impl Aggregator {
    pub fn new(plan: &Plan) -> Self {
        Self {
            plan: plan.clone(),
            nonsat: Proportion::default(),
            terminal: Default::default(),
            unsat_profiles: Default::default(),
            coverage: Default::default(),
            tail: Default::default(),
            unreached: Default::default(),
            survival: Default::default(),
            bad_final: RunningMoments::default(),
            bad_unsat: Default::default(),
            unsat_edges: Default::default(),
        }
    }

    fn beta_at(&self, s: u64, j: usize) -> Result<f64> {
        let model = &self.plan.model;
        model.beta(model.ell_inverse(s as f64)?, j)
    }

    pub fn push(&mut self, rec: &TrajectoryRecord) -> Result<()> {
        let cfg = &self.plan.config;
        let d = cfg.d;
        let big_n = self.plan.model.max_edges();
        self.nonsat.push(!rec.saturated);
        match cfg.kind {
            ExperimentKind::Equivalence => {
                let key = rec.terminal_edges.clone().unwrap_or_default();
                *self.terminal.entry(key).or_insert(0) += 1;
            }
            ExperimentKind::Saturation => {
                *self.unsat_profiles.entry(rec.unsaturated_degrees.clone()).or_insert(0) += 1;
            }
            ExperimentKind::DegreeProfile => {
                for &s in &self.plan.checkpoints.s {
                    let Some(row) = rec.row(CheckpointKind::Edges, s) else {
                        *self.unreached.entry(s).or_insert(0) += 1;
                        continue;
                    };
                    for j in 0..d {
                        let beta = self.beta_at(s, j)?;
                        let half = cfg.window_w * beta.sqrt();
                        let x = row.degree_counts[j] as f64;
                        let entry = self.coverage.entry((s, j)).or_default();
                        entry.0.push((x - beta).abs() <= half);
                        entry.1.push(x);
                    }
                }
            }
            ExperimentKind::TailPoisson | ExperimentKind::TailMoments => {
                for &t in &self.plan.checkpoints.t {
                    let Some(row) = rec.row(CheckpointKind::Deficit, t) else {
                        *self.unreached.entry(t).or_insert(0) += 1;
                        continue;
                    };
                    for j in 0..d - 1 {
                        self.tail.entry((t, j)).or_default().push(row.degree_counts[j]);
                    }
                }
            }
            ExperimentKind::Survival => {
                for &t in &self.plan.checkpoints.t {
                    for j in 0..d - 1 {
                        let survived = rec.last_low_degree[j] < big_n - t;
                        self.survival.entry((t, j)).or_default().push(survived);
                    }
                }
            }
            ExperimentKind::Badballs => {
                self.bad_final.push(rec.bad_final.unwrap_or(0) as f64);
                for &t in &self.plan.checkpoints.t {
                    match rec.row(CheckpointKind::Deficit, t).and_then(|r| r.bad_unsaturated) {
                        Some(b) => self.bad_unsat.entry(t).or_default().push(b as f64),
                        None => *self.unreached.entry(t).or_insert(0) += 1,
                    }
                }
            }
            ExperimentKind::IndeptCheck => {
                for &t in &self.plan.checkpoints.t {
                    let Some(row) = rec.row(CheckpointKind::Deficit, t) else {
                        *self.unreached.entry(t).or_insert(0) += 1;
                        continue;
                    };
                    let entry = self.unsat_edges.entry(t).or_default();
                    entry.0.push(row.unsaturated_edges.unwrap_or(0) > 0);
                    entry.1.push(row.critical_edges.unwrap_or(0) > 0);
                }
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<AggregateReport> {
        let cfg = &self.plan.config;
        let model = &self.plan.model;
        let (n, d) = (cfg.n, cfg.d);
        let log_n = model.log_n();
        let z = cfg.z;
        let mut rows = Vec::new();
        let nonsat_row = |reference: Option<f64>, exact: Option<String>| {
            let (lo, hi) = self.nonsat.wilson(z);
            ReportRow {
                reference,
                exact,
                lower: Some(lo),
                upper: Some(hi),
                ..ReportRow::new("nonsat", self.nonsat.estimate(), self.nonsat.trials)
            }
        };
        for (&t, &count) in &self.unreached {
            rows.push(ReportRow { t: Some(t), ..ReportRow::new("unreached", count as f64, cfg.trials) });
        }
        match cfg.kind {
            ExperimentKind::Equivalence => {
                let oracle = Oracle::new(n, d)?.with_budget(cfg.oracle_budget);
                let exact = oracle.exact_outcome_distribution()?;
                let trials = self.nonsat.trials as f64;
                let mut max_z = 0.0f64;
                for (edges, p) in &exact.entries {
                    let p_f = p.to_f64().unwrap_or(f64::NAN);
                    let count = self.terminal.get(edges).copied().unwrap_or(0);
                    let sigma = (p_f * (1.0 - p_f) / trials).sqrt();
                    let freq = count as f64 / trials;
                    if sigma > 0.0 {
                        max_z = max_z.max((freq - p_f).abs() / sigma);
                    }
                    rows.push(ReportRow {
                        reference: Some(p_f),
                        lower: Some(p_f - 5.0 * sigma),
                        upper: Some(p_f + 5.0 * sigma),
                        exact: Some(format_rational(p)),
                        label: Some(edge_label(edges)),
                        ..ReportRow::new("terminal_class", freq, self.nonsat.trials)
                    });
                }
                let stray: u64 = self
                    .terminal
                    .iter()
                    .filter(|(e, _)| !exact.entries.contains_key(*e))
                    .map(|(_, c)| c)
                    .sum();
                rows.push(ReportRow::new("stray_terminal_count", stray as f64, self.nonsat.trials));
                rows.push(ReportRow::new("max_abs_z", max_z, self.nonsat.trials));
                let p = oracle.exact_nonsaturation_probability()?;
                rows.push(nonsat_row(p.to_f64(), Some(format_rational(&p))));
            }
            ExperimentKind::Saturation => {
                let (prediction, scale) = nonsat_prediction(n, d, log_n);
                rows.push(nonsat_row(prediction, None));
                if let Some(scale) = scale {
                    let (lo, hi) = self.nonsat.wilson(z);
                    rows.push(ReportRow {
                        lower: Some(lo * scale),
                        upper: Some(hi * scale),
                        reference: Some(1.0),
                        ..ReportRow::new("nonsat_scaled", self.nonsat.estimate() * scale, self.nonsat.trials)
                    });
                }
                for (profile, &count) in &self.unsat_profiles {
                    let label = profile.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
                    rows.push(ReportRow {
                        label: Some(label),
                        k: Some(profile.len() as u64),
                        ..ReportRow::new("unsat_profile", count as f64 / self.nonsat.trials as f64, self.nonsat.trials)
                    });
                }
            }
            ExperimentKind::DegreeProfile => {
                for (&(s, j), (inside, moments)) in &self.coverage {
                    let beta = self.beta_at(s, j)?;
                    let base = ReportRow { s: Some(s), j: Some(j), reference: Some(beta), ..Default::default() };
                    rows.push(ReportRow {
                        label: Some(format!("w={}", cfg.window_w)),
                        ..ReportRow { metric: "window_coverage".into(), value: inside.estimate(), samples: inside.trials, ..base.clone() }
                    });
                    rows.push(ReportRow { metric: "mean".into(), value: moments.mean(), samples: moments.count(), ..base.clone() });
                    rows.push(ReportRow {
                        metric: "sd_over_sqrt_beta".into(),
                        value: moments.std_dev() / beta.sqrt(),
                        samples: moments.count(),
                        ..base
                    });
                }
            }
            ExperimentKind::TailPoisson => {
                for (&(t, j), pmf) in &self.tail {
                    let lambda = model.f(t as f64, j)?;
                    let law = Poisson(lambda);
                    rows.push(ReportRow {
                        t: Some(t),
                        j: Some(j),
                        reference: Some(lambda),
                        ..ReportRow::new("tv_poisson", tv_distance(pmf, &law), pmf.total())
                    });
                    let top = pmf
                        .counts()
                        .keys()
                        .next_back()
                        .copied()
                        .unwrap_or(0)
                        .max((lambda + 5.0 * lambda.sqrt()).ceil() as u64);
                    for i in 0..=top {
                        rows.push(ReportRow {
                            t: Some(t),
                            j: Some(j),
                            k: Some(i),
                            reference: Some(crate::analytics::poisson_pmf(lambda, i)),
                            ..ReportRow::new("pmf", pmf.count(i) as f64 / pmf.total() as f64, pmf.total())
                        });
                    }
                }
            }
            ExperimentKind::TailMoments => {
                for (&(t, j), pmf) in &self.tail {
                    let lambda = model.f(t as f64, j)?;
                    for k in 1..=cfg.max_moment {
                        let moment = pmf.factorial_moment(k)?;
                        let target = lambda.powi(k as i32);
                        let base = ReportRow {
                            t: Some(t),
                            j: Some(j),
                            k: Some(k as u64),
                            reference: Some(target),
                            samples: pmf.total(),
                            ..Default::default()
                        };
                        rows.push(ReportRow { metric: "factorial_moment".into(), value: moment, ..base.clone() });
                        rows.push(ReportRow { metric: "moment_ratio".into(), value: moment / target, reference: Some(1.0), ..base });
                    }
                }
            }
            ExperimentKind::Survival => {
                for (&(t, j), prop) in &self.survival {
                    let (lo, hi) = prop.wilson(z);
                    rows.push(ReportRow {
                        t: Some(t),
                        j: Some(j),
                        reference: Some((-model.f(t as f64, j)?).exp()),
                        lower: Some(lo),
                        upper: Some(hi),
                        ..ReportRow::new("survival", prop.estimate(), prop.trials)
                    });
                }
            }
            ExperimentKind::Badballs => {
                let se = self.bad_final.std_error();
                let mean = self.bad_final.mean();
                rows.push(ReportRow {
                    lower: Some(mean - z * se),
                    upper: Some(mean + z * se),
                    ..ReportRow::new("bad_final_mean", mean, self.bad_final.count())
                });
                rows.push(ReportRow::new("bad_final_over_log_n", mean / log_n, self.bad_final.count()));
                for (&t, m) in &self.bad_unsat {
                    rows.push(ReportRow {
                        t: Some(t),
                        lower: Some(m.mean() - z * m.std_error()),
                        upper: Some(m.mean() + z * m.std_error()),
                        ..ReportRow::new("bad_unsaturated_mean", m.mean(), m.count())
                    });
                }
            }
            ExperimentKind::IndeptCheck => {
                for (&t, (unsat, critical)) in &self.unsat_edges {
                    for (metric, prop) in [("unsaturated_edge_freq", unsat), ("critical_edge_freq", critical)] {
                        let (lo, hi) = prop.wilson(z);
                        rows.push(ReportRow {
                            t: Some(t),
                            lower: Some(lo),
                            upper: Some(hi),
                            label: Some(format!("eps={}", cfg.epsilon)),
                            ..ReportRow::new(metric, prop.estimate(), prop.trials)
                        });
                    }
                }
            }
        }
        Ok(AggregateReport {
            kind: cfg.kind,
            n,
            d,
            trials: cfg.trials,
            base_seed: cfg.base_seed,
            sampler: self.plan.sampler,
            rng: RNG_ALGORITHM.to_string(),
            seed_mixer: SEED_MIXER.to_string(),
            rows,
        })
    }
}

/// Asymptotic non-saturation probability and the factor that normalizes an
/// estimate by it: `(d-1)/log n` for even `dn`, `(d-1)(d-2)/log^2 n` for odd.
fn nonsat_prediction(n: usize, d: usize, log_n: f64) -> (Option<f64>, Option<f64>) {
    let prediction = if (n * d).is_multiple_of(2) {
        (d - 1) as f64 / log_n
    } else {
        ((d - 1) * (d - 2)) as f64 / (log_n * log_n)
    };
    if prediction > 0.0 {
        (Some(prediction), Some(1.0 / prediction))
    } else {
        (None, None)
    }
}

fn edge_label(edges: &[[u32; 2]]) -> String {
    edges.iter().map(|[u, v]| format!("{u}-{v}")).collect::<Vec<_>>().join(" ")
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
enum JsonlLine<'a> {
    Header {
        schema_version: u32,
        rng: &'a str,
        seed_mixer: &'a str,
        sampler: Sampler,
        checkpoints: &'a Checkpoints,
        config: &'a ExperimentConfig,
    },
    Trial(&'a TrajectoryRecord),
    Footer {
        schema_version: u32,
        complete: bool,
        trials_written: u64,
        error: Option<String>,
    },
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn trial_csv_rows(rec: &TrajectoryRecord, out: &mut String) {
    fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
        x.map(|v| v.to_string()).unwrap_or_default()
    }
    let prefix = format!(
        "{},{},{},{},{},{},{},{},{}",
        rec.trial,
        rec.seed,
        rec.sampler,
        rec.final_edges,
        rec.saturated,
        join(&rec.unsaturated_degrees),
        join(&rec.last_low_degree),
        opt(rec.bad_final),
        opt(rec.balls_at_end),
    );
    if rec.checkpoints.is_empty() {
        let _ = writeln!(out, "{prefix},,,,,,,,,,,,,,,");
        return;
    }
    for row in &rec.checkpoints {
        let kind = match row.kind {
            CheckpointKind::Edges => "s",
            CheckpointKind::Deficit => "t",
            CheckpointKind::Balls => "m",
        };
        let _ = writeln!(
            out,
            "{prefix},{kind},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.target,
            row.reached,
            opt(row.s),
            opt(row.t),
            opt(row.m),
            join(&row.degree_counts),
            row.ball_counts.as_deref().map(join).unwrap_or_default(),
            opt(row.bad),
            opt(row.bad_unsaturated),
            opt(row.waiting),
            opt(row.unsaturated_vertices),
            opt(row.unsaturated_edges),
            opt(row.critical_edges),
            opt(row.critical_vertices),
        );
    }
}

struct TrialWriter {
    out: BufWriter<File>,
    format: OutputFormat,
    written: u64,
}

impl TrialWriter {
    fn create(path: &PathBuf, format: OutputFormat, plan: &Plan) -> Result<Self> {
        let file = File::create(path)?;
        let mut writer = Self { out: BufWriter::new(file), format, written: 0 };
        match format {
            OutputFormat::Jsonl => {
                let header = JsonlLine::Header {
                    schema_version: SCHEMA_VERSION,
                    rng: RNG_ALGORITHM,
                    seed_mixer: SEED_MIXER,
                    sampler: plan.sampler,
                    checkpoints: &plan.checkpoints,
                    config: &plan.config,
                };
                serde_json::to_writer(&mut writer.out, &header)?;
                writeln!(writer.out)?;
            }
            OutputFormat::Csv => {
                writeln!(writer.out, "{TRIAL_CSV_HEADER}")?;
            }
        }
        Ok(writer)
    }

    fn write(&mut self, rec: &TrajectoryRecord) -> Result<()> {
        let io = |source| Error::Io { trial: Some(rec.trial), source };
        match self.format {
            OutputFormat::Jsonl => {
                serde_json::to_writer(&mut self.out, &JsonlLine::Trial(rec))?;
                writeln!(self.out).map_err(io)?;
            }
            OutputFormat::Csv => {
                let mut buf = String::new();
                trial_csv_rows(rec, &mut buf);
                self.out.write_all(buf.as_bytes()).map_err(io)?;
            }
        }
        self.written += 1;
        Ok(())
    }

    fn finish(mut self, error: Option<String>) -> Result<()> {
        let complete = error.is_none();
        match self.format {
            OutputFormat::Jsonl => {
                let footer = JsonlLine::Footer {
                    schema_version: SCHEMA_VERSION,
                    complete,
                    trials_written: self.written,
                    error,
                };
                serde_json::to_writer(&mut self.out, &footer)?;
                writeln!(self.out)?;
            }
            OutputFormat::Csv => {
                writeln!(self.out, "#footer,complete={complete},trials_written={}", self.written)?;
            }
        }
        self.out.flush()?;
        Ok(())
    }
}

/// Runs an experiment: writes per-trial records and the aggregate CSV when
/// paths are configured, and returns the aggregate report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<AggregateReport> {
    let plan = config.plan()?;
    let mut writer = match &config.output {
        Some(path) => Some(TrialWriter::create(path, config.format, &plan)?),
        None => None,
    };
    let mut aggregator = Aggregator::new(&plan);
    let outcome = for_each_record(&plan, |rec| {
        if let Some(w) = writer.as_mut() {
            w.write(&rec)?;
        }
        aggregator.push(&rec)
    });
    if let Some(w) = writer {
        w.finish(outcome.as_ref().err().map(|e| e.to_string()))?;
    }
    outcome?;
    let report = aggregator.finish()?;
    if let Some(path) = &config.report {
        std::fs::write(path, report.to_csv())?;
    }
    Ok(report)
}

/// Summary line for logs.
pub fn describe(report: &AggregateReport) -> String {
    json!({
        "kind": report.kind,
        "n": report.n,
        "d": report.d,
        "trials": report.trials,
        "sampler": report.sampler,
        "rows": report.rows.len(),
    })
    .to_string()
}
