//! One run of the graph d-process.
//!
//! Adds random edges between vertices of degree below `d` until none can be
//! added, printing the degree counts at a few edge counts and the final
//! outcome.
//!
//! ```text
//! cargo run --release --example graph_process -- [n] [d] [seed]
//! ```

use dprocess::{CheckpointKind, Checkpoints, GraphProcess};

fn main() -> dprocess::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n = args.first().copied().unwrap_or(10_000) as usize;
    let d = args.get(1).copied().unwrap_or(3) as usize;
    let seed = args.get(2).copied().unwrap_or(7);

    let big_n = (n * d / 2) as u64;
    let checkpoints = Checkpoints {
        s: vec![big_n / 4, big_n / 2, 3 * big_n / 4],
        t: vec![20, 5, 1],
        ..Default::default()
    };
    let record = GraphProcess::new(n, d, seed)?.run(&checkpoints, true)?;

    println!("n = {n}, d = {d}, N = {big_n}, seed = {seed}");
    for row in record.checkpoints.iter().filter(|r| r.reached) {
        let label = match row.kind {
            CheckpointKind::Edges => format!("s = {}", row.target),
            _ => format!("t = {}", row.target),
        };
        println!(
            "{label:>12}: degree counts {:?}, {} unsaturated, {} unsaturated edges",
            row.degree_counts,
            row.unsaturated_vertices.unwrap_or(0),
            row.unsaturated_edges.unwrap_or(0),
        );
    }
    println!(
        "final: {} edges, saturated = {}, degrees below d: {:?}",
        record.final_edges, record.saturated, record.unsaturated_degrees
    );
    for (j, s) in record.last_low_degree.iter().enumerate() {
        println!("last edge count with a vertex of degree <= {j}: {s}");
    }
    Ok(())
}
