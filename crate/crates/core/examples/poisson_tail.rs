//! The number of low-degree vertices near the end is nearly Poisson.
//!
//! Runs the `tail-poisson` experiment and prints the empirical law of
//! `D_j(N - t)` beside `Po(f_j)`.
//!
//! ```text
//! cargo run --release --example poisson_tail -- [n] [d] [trials]
//! ```

use dprocess::harness::{run_experiment, ExperimentConfig, ExperimentKind};

fn main() -> dprocess::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n = args.first().copied().unwrap_or(20_000) as usize;
    let d = args.get(1).copied().unwrap_or(2) as usize;
    let trials = args.get(2).copied().unwrap_or(1_000);

    let report = run_experiment(&ExperimentConfig::new(ExperimentKind::TailPoisson, n, d, trials, 9))?;
    for tv in report.metric("tv_poisson") {
        let (t, j) = (tv.t.unwrap_or(0), tv.j.unwrap_or(0));
        println!(
            "D_{j}(N - {t}): f_{j} = {:.3}, total variation to Poisson = {:.4}",
            tv.reference.unwrap_or(f64::NAN),
            tv.value
        );
        println!("{:>5} {:>10} {:>10}", "k", "empirical", "Poisson");
        for row in report.metric("pmf").filter(|r| r.t == tv.t && r.j == tv.j) {
            println!("{:>5} {:>10.4} {:>10.4}", row.k.unwrap_or(0), row.value, row.reference.unwrap_or(f64::NAN));
        }
    }
    Ok(())
}
