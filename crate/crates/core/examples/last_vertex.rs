//! When does the last vertex of low degree disappear?
//!
//! `S_j` is the last edge count at which some vertex has degree at most `j`.
//! `P(S_j < N - t)` approaches `exp(-f_j)`.
//!
//! ```text
//! cargo run --release --example last_vertex -- [n] [d] [trials]
//! ```

use dprocess::harness::{run_experiment, ExperimentConfig, ExperimentKind};

fn main() -> dprocess::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n = args.first().copied().unwrap_or(20_000) as usize;
    let d = args.get(1).copied().unwrap_or(2) as usize;
    let trials = args.get(2).copied().unwrap_or(1_000);

    let report = run_experiment(&ExperimentConfig::new(ExperimentKind::Survival, n, d, trials, 3))?;
    println!("{:>3} {:>6} {:>10} {:>21} {:>10}", "j", "t", "estimate", "95% interval", "exp(-f_j)");
    for row in report.metric("survival") {
        println!(
            "{:>3} {:>6} {:>10.4} [{:>8.4}, {:>8.4}] {:>10.4}",
            row.j.unwrap_or(0),
            row.t.unwrap_or(0),
            row.value,
            row.lower.unwrap_or(f64::NAN),
            row.upper.unwrap_or(f64::NAN),
            row.reference.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
