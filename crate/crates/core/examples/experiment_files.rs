//! Running an experiment from a JSON config and reading its output files.
//!
//! Writes per-trial JSONL records and the aggregate CSV into a directory
//! (default: a fresh one under the system temp dir), then summarizes them.
//!
//! ```text
//! cargo run --release --example experiment_files -- [out_dir]
//! ```

use dprocess::harness::{run_experiment, ExperimentConfig};
use dprocess::TrajectoryRecord;

fn main() -> dprocess::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("dproc-example-{}", std::process::id())));
    std::fs::create_dir_all(&dir)?;

    let mut config: ExperimentConfig = serde_json::from_str(
        r#"{
            "kind": "indept-check",
            "n": 5000,
            "d": 3,
            "trials": 200,
            "base_seed": 2024,
            "checkpoints_t": [2, 20]
        }"#,
    )?;
    config.output = Some(dir.join("trials.jsonl"));
    config.report = Some(dir.join("report.csv"));
    let report = run_experiment(&config)?;

    let text = std::fs::read_to_string(dir.join("trials.jsonl"))?;
    let mut lines = text.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap_or("{}"))?;
    println!("rng: {}", header["rng"]);
    let mut unsaturated_final = 0;
    let mut trials = 0;
    for line in lines {
        let value: serde_json::Value = serde_json::from_str(line)?;
        if value["record"] == "trial" {
            let record: TrajectoryRecord = serde_json::from_value(value)?;
            trials += 1;
            unsaturated_final += !record.saturated as u32;
        } else {
            println!("footer: complete = {}", value["complete"]);
        }
    }
    println!("{trials} trial records, {unsaturated_final} not saturated");
    print!("{}", report.to_csv());
    println!("files in {}", dir.display());
    Ok(())
}
