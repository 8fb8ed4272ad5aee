//! The `dproc` command line: `run`, `oracle` and `predict`.
//!
//! Exit codes: 0 on success (including `--help`), 1 on usage errors and
//! invalid parameters, 2 on runtime failures.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde_json::json;

use crate::analytics::AnalyticModel;
use crate::error::{Error, Result};
use crate::harness::{run_experiment, ExperimentConfig, ExperimentKind, OutputFormat};
use crate::oracle::{format_rational, Oracle};
use crate::record::Sampler;

#[derive(Debug, Parser)]
#[command(name = "dproc", version, about = "Simulate and verify the random graph d-process")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a multi-trial experiment and print its aggregate report as CSV.
    Run(RunArgs),
    /// Exact laws for tiny instances by enumeration.
    Oracle(OracleArgs),
    /// Evaluate the closed-form predictions.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON experiment config; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// equivalence | degree-profile | tail-poisson | tail-moments |
    /// saturation | badballs | survival | indept-check
    #[arg(long)]
    kind: Option<ExperimentKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed; trial seeds are derived from it and the trial index.
    #[arg(long)]
    seed: Option<u64>,
    /// graph | faithful | accelerated
    #[arg(long)]
    mode: Option<Sampler>,
    /// Edge-count checkpoints.
    #[arg(long = "s", value_delimiter = ',')]
    checkpoints_s: Vec<u64>,
    /// Deficit checkpoints.
    #[arg(long = "t", value_delimiter = ',')]
    checkpoints_t: Vec<u64>,
    /// Ball-count checkpoints (bin samplers).
    #[arg(long = "m", value_delimiter = ',')]
    checkpoints_m: Vec<u64>,
    /// Per-trial record file.
    #[arg(long)]
    output: Option<PathBuf>,
    /// jsonl | csv
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Aggregate CSV file (also printed to stdout).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Window half-width multiplier for degree-profile.
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    max_moment: Option<u32>,
    /// Check all invariants after every step.
    #[arg(long)]
    validate: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Query {
    /// Probability that the final graph is not saturated.
    Nonsat,
    /// Law of the final graph (or of the graph after `--s` edges).
    Terminal,
    /// Law of the degree-count vector after `--s` edges.
    Degrees,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, value_enum)]
    query: Query,
    #[arg(long)]
    s: Option<u64>,
    /// Maximum number of stored states.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Edge counts: prints ell^{-1}(s), tau and beta_i there.
    #[arg(long, value_delimiter = ',')]
    s: Vec<f64>,
    /// Ball counts: prints ell(x), tau and beta_i there.
    #[arg(long, value_delimiter = ',')]
    x: Vec<f64>,
    /// Deficits: prints f_j(t) for 0 <= j <= d - 2.
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    #[arg(long)]
    json: bool,
}

/// Runs the command line on `args` (including the program name).
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().ansi().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => run(args, out),
        Command::Oracle(args) => oracle(args, out),
        Command::Predict(args) => predict(args, out),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidParameter(_) => 1,
                _ => 2,
            }
        }
    }
}

fn run(args: RunArgs, out: &mut dyn Write) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => serde_json::from_str::<ExperimentConfig>(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.kind {
        config.kind = v;
    }
    if let Some(v) = args.n {
        config.n = v;
    }
    if let Some(v) = args.d {
        config.d = v;
    }
    if let Some(v) = args.trials {
        config.trials = v;
    }
    if let Some(v) = args.seed {
        config.base_seed = v;
    }
    if args.mode.is_some() {
        config.mode = args.mode;
    }
    if !args.checkpoints_s.is_empty() {
        config.checkpoints_s = args.checkpoints_s;
    }
    if !args.checkpoints_t.is_empty() {
        config.checkpoints_t = args.checkpoints_t;
    }
    if !args.checkpoints_m.is_empty() {
        config.checkpoints_m = args.checkpoints_m;
    }
    if args.output.is_some() {
        config.output = args.output;
    }
    if let Some(v) = args.format {
        config.format = v;
    }
    if args.report.is_some() {
        config.report = args.report;
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    if let Some(v) = args.epsilon {
        config.epsilon = v;
    }
    if let Some(v) = args.window {
        config.window_w = v;
    }
    if let Some(v) = args.max_moment {
        config.max_moment = v;
    }
    config.validate |= args.validate;
    let report = run_experiment(&config)?;
    out.write_all(report.to_csv().as_bytes())?;
    Ok(())
}

fn oracle(args: OracleArgs, out: &mut dyn Write) -> Result<()> {
    let mut oracle = Oracle::new(args.n, args.d)?;
    if let Some(budget) = args.budget {
        oracle = oracle.with_budget(budget);
    }
    match args.query {
        Query::Nonsat => {
            let p = oracle.exact_nonsaturation_probability()?;
            if args.json {
                let value = json!({
                    "n": args.n,
                    "d": args.d,
                    "nonsat": format_rational(&p),
                    "decimal": p.to_f64(),
                });
                writeln!(out, "{value}")?;
            } else {
                writeln!(out, "{} {}", format_rational(&p), p.to_f64().unwrap_or(f64::NAN))?;
            }
        }
        Query::Terminal => {
            let (dist, reach) = match args.s {
                Some(s) => oracle.exact_graph_distribution(s)?,
                None => (oracle.exact_outcome_distribution()?, num_rational::BigRational::from_integer(1.into())),
            };
            if args.json {
                let mut value = dist.to_json();
                value["reach_probability"] = json!(format_rational(&reach));
                writeln!(out, "{value}")?;
            } else {
                writeln!(out, "# reach probability {}", format_rational(&reach))?;
                for (edges, p) in &dist.entries {
                    let label = edges.iter().map(|[u, v]| format!("{u}-{v}")).collect::<Vec<_>>().join(" ");
                    writeln!(out, "{} {} [{label}]", format_rational(p), p.to_f64().unwrap_or(f64::NAN))?;
                }
            }
        }
        Query::Degrees => {
            let s = args.s.ok_or_else(|| crate::error::invalid("--query degrees needs --s"))?;
            let dist = oracle.exact_degree_count_distribution(s)?;
            if args.json {
                writeln!(out, "{}", dist.to_json())?;
            } else {
                writeln!(out, "# reach probability {}", format_rational(&dist.reach_probability))?;
                for (counts, p) in &dist.entries {
                    let label = counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
                    writeln!(out, "{} {} [{label}]", format_rational(p), p.to_f64().unwrap_or(f64::NAN))?;
                }
            }
        }
    }
    Ok(())
}

fn predict(args: PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model = AnalyticModel::new(args.n, args.d)?;
    let d = args.d;
    let mut lines = Vec::new();
    let betas = |x: f64| -> Result<Vec<(String, f64)>> {
        let mut v = vec![("tau".to_string(), model.tau(x)?)];
        for i in 0..=d {
            v.push((format!("beta_{i}"), model.beta(x, i)?));
        }
        Ok(v)
    };
    for &s in &args.s {
        let x = model.ell_inverse(s)?;
        let mut fields = vec![("s".to_string(), s), ("ell_inverse".to_string(), x)];
        fields.extend(betas(x)?);
        lines.push(fields);
    }
    for &x in &args.x {
        let mut fields = vec![("x".to_string(), x), ("ell".to_string(), model.ell(x)?)];
        fields.extend(betas(x)?);
        lines.push(fields);
    }
    for &t in &args.t {
        let mut fields = vec![("t".to_string(), t)];
        for j in 0..d - 1 {
            fields.push((format!("f_{j}"), model.f(t, j)?));
        }
        lines.push(fields);
    }
    if lines.is_empty() {
        return Err(crate::error::invalid("predict needs at least one of --s, --x, --t"));
    }
    for fields in lines {
        if args.json {
            let map: serde_json::Map<String, serde_json::Value> =
                fields.into_iter().map(|(k, v)| (k, json!(v))).collect();
            writeln!(out, "{}", serde_json::Value::Object(map))?;
        } else {
            let text = fields.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_cli(std::iter::once("dproc").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn predict_at_zero_edges() {
        let (code, out, _) = call(&["predict", "--n", "1000", "--d", "3", "--s", "0"]);
        assert_eq!(code, 0);
        assert!(out.contains("ell_inverse=0 "), "{out}");
        assert!(out.contains("beta_0=1000 "), "{out}");
    }

    #[test]
    fn oracle_nonsat_for_four_vertices() {
        let (code, out, _) = call(&["oracle", "--n", "4", "--d", "2", "--query", "nonsat"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("4/15 "), "{out}");
    }

    #[test]
    fn run_two_vertices_never_saturates() {
        let (code, out, _) =
            call(&["run", "--kind", "saturation", "--n", "2", "--d", "2", "--trials", "10", "--seed", "1", "--workers", "1"]);
        assert_eq!(code, 0);
        let row = out.lines().find(|l| l.starts_with("saturation,2,2,nonsat,")).unwrap();
        assert_eq!(row.split(',').nth(8), Some("1"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(call(&["predict", "--help"]).0, 0);
        let (code, _, err) = call(&["predict", "--bogus"]);
        assert_eq!(code, 1);
        assert!(err.contains("Usage"), "{err}");
        assert_eq!(call(&["oracle", "--n", "40", "--d", "2", "--query", "nonsat"]).0, 1);
        assert_eq!(call(&["oracle", "--n", "10", "--d", "3", "--query", "nonsat", "--budget", "5"]).0, 2);
    }
}
