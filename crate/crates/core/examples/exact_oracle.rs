//! Exact laws on tiny instances, as rationals.
//!
//! ```text
//! cargo run --release --example exact_oracle -- [n] [d]
//! ```

use dprocess::oracle::{format_rational, Oracle};
use num_traits::Zero;

fn main() -> dprocess::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n = args.first().copied().unwrap_or(5) as usize;
    let d = args.get(1).copied().unwrap_or(2) as usize;
    let oracle = Oracle::new(n, d)?;

    let terminal = oracle.exact_outcome_distribution()?;
    println!("n = {n}, d = {d}: {} possible final graphs", terminal.entries.len());
    let big_n = n * d / 2;
    for k in 0..=big_n {
        let p = terminal.edge_count_probability(k);
        if !p.is_zero() {
            println!("  P(final edges = {k}) = {}", format_rational(&p));
        }
    }
    println!("  P(not saturated) = {}", format_rational(&oracle.exact_nonsaturation_probability()?));

    let s = (big_n / 2) as u64;
    let degrees = oracle.exact_degree_count_distribution(s)?;
    println!("degree counts (D_0, .., D_d) after {s} edges:");
    for (counts, p) in &degrees.entries {
        println!("  {counts:?}: {}", format_rational(p));
    }
    Ok(())
}
