//! The balls-in-bins formulation, ball by ball.
//!
//! Drops balls one at a time and shows how each is classified, then
//! compares the faithful and accelerated samplers on the same instance.
//!
//! ```text
//! cargo run --release --example bin_process -- [n] [d]
//! ```

use dprocess::{BallEvent, BinProcess, CheckpointKind, Checkpoints, Sampler};

fn main() -> dprocess::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n = args.first().copied().unwrap_or(2_000) as usize;
    let d = args.get(1).copied().unwrap_or(2) as usize;

    let mut p = BinProcess::new(8, 2, 3, Sampler::Faithful)?;
    println!("first balls on 8 bins, d = 2:");
    for _ in 0..12 {
        let event = p.drop_ball();
        let what = match event {
            BallEvent::Unnumbered(b) => format!("unnumbered (bin {b} saturated)"),
            BallEvent::Waiting(b) => format!("waits in bin {b}"),
            BallEvent::GoodPair(a, b) => format!("good pair, edge {a}-{b}"),
            BallEvent::BadPair(a, b) => format!("bad pair on bins {a}, {b}"),
        };
        println!("  ball {:>2}: {what:<32} Y = {:?}, deficit {}", p.balls_dropped(), p.y_counts(), p.deficit());
    }

    let checkpoints = Checkpoints { t: vec![50, 10, 1], m: vec![n as u64, 5 * n as u64], ..Default::default() };
    for mode in [Sampler::Faithful, Sampler::Accelerated] {
        let record = BinProcess::new(n, d, 11, mode)?.run(&checkpoints, true)?;
        println!("\n{mode}: n = {n}, d = {d}");
        for row in record.checkpoints.iter().filter(|r| r.reached) {
            let label = match row.kind {
                CheckpointKind::Balls => format!("m = {}", row.target),
                _ => format!("t = {}", row.target),
            };
            println!(
                "{label:>12}: Y = {:?}, D = {:?}, B = {}, B~ = {}",
                row.ball_counts.as_deref().unwrap_or_default(),
                row.degree_counts,
                row.bad.unwrap_or(0),
                row.bad_unsaturated.unwrap_or(0),
            );
        }
        println!(
            "final: {} edges after {} balls, {} bad balls, saturated = {}",
            record.final_edges,
            record.balls_at_end.unwrap_or(0),
            record.bad_final.unwrap_or(0),
            record.saturated
        );
    }
    Ok(())
}
