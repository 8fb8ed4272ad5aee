//! How often the process fails to saturate, against the asymptotic rate.
//!
//! ```text
//! cargo run --release --example saturation -- [trials] [d] [n...]
//! ```

use dprocess::harness::{run_experiment, ExperimentConfig, ExperimentKind};

fn main() -> dprocess::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let trials = args.first().copied().unwrap_or(2_000);
    let d = args.get(1).copied().unwrap_or(2) as usize;
    let sizes: Vec<usize> = match args.get(2..) {
        Some(rest) if !rest.is_empty() => rest.iter().map(|&n| n as usize).collect(),
        _ => vec![100, 1_000, 10_000],
    };
    println!("{:>8} {:>9} {:>21} {:>11}", "n", "P(F)", "95% interval", "predicted");
    for n in sizes {
        let report = run_experiment(&ExperimentConfig::new(ExperimentKind::Saturation, n, d, trials, 5))?;
        let row = report.metric("nonsat").next().expect("nonsat row");
        println!(
            "{n:>8} {:>9.4} [{:>8.4}, {:>8.4}] {:>11}",
            row.value,
            row.lower.unwrap_or(f64::NAN),
            row.upper.unwrap_or(f64::NAN),
            row.reference.map(|r| format!("{r:.4}")).unwrap_or_else(|| "-".into()),
        );
        for profile in report.metric("unsat_profile") {
            println!("{:>8} final degrees below d = [{}]: {:.4}", "", profile.label.as_deref().unwrap_or(""), profile.value);
        }
    }
    Ok(())
}
