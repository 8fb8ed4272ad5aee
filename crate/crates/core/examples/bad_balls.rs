//! Bad-ball statistics of the bin d-process.
//!
//! Prints, for each `n`, the mean total of bad balls `B_f` at termination
//! and the mean number `B~(t)` of bad balls sitting in unsaturated bins at
//! the last step at deficit `t`, as one JSON object per line.
//!
//! ```text
//! cargo run --release --example bad_balls -- [trials] [base_seed] [d] [n...]
//! ```

use dprocess::harness::{ExperimentConfig, ExperimentKind};
use dprocess::stats::RunningMoments;
use dprocess::{CheckpointKind, Sampler};
use serde_json::json;

fn main() -> dprocess::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let trials = args.first().copied().unwrap_or(200);
    let base_seed = args.get(1).copied().unwrap_or(1);
    let d = args.get(2).copied().unwrap_or(2) as usize;
    let sizes: Vec<usize> = match args.get(3..) {
        Some(rest) if !rest.is_empty() => rest.iter().map(|&n| n as usize).collect(),
        _ => vec![1_000, 10_000, 100_000],
    };
    let grid = [1u64, 10, 100, 1000];
    for n in sizes {
        let mut config = ExperimentConfig::new(ExperimentKind::Badballs, n, d, trials, base_seed);
        config.mode = Some(Sampler::Accelerated);
        config.checkpoints_t = grid.to_vec();
        let plan = config.plan()?;
        let mut bad_final = RunningMoments::default();
        let mut bad_unsat = vec![RunningMoments::default(); grid.len()];
        dprocess::harness::for_each_record(&plan, |rec| {
            bad_final.push(rec.bad_final.unwrap_or(0) as f64);
            for (acc, &t) in bad_unsat.iter_mut().zip(&grid) {
                if let Some(b) = rec.row(CheckpointKind::Deficit, t).and_then(|r| r.bad_unsaturated) {
                    acc.push(b as f64);
                }
            }
            Ok(())
        })?;
        let log_n = (n as f64).ln();
        let line = json!({
            "n": n,
            "d": d,
            "trials": trials,
            "base_seed": base_seed,
            "bad_final_mean": bad_final.mean(),
            "bad_final_se": bad_final.std_error(),
            "bad_final_over_log_n": bad_final.mean() / log_n,
            "bad_unsaturated": grid.iter().zip(&bad_unsat).map(|(t, m)| json!({
                "t": t, "mean": m.mean(), "se": m.std_error(), "samples": m.count(),
            })).collect::<Vec<_>>(),
        });
        println!("{line}");
    }
    Ok(())
}
