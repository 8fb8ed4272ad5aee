use dprocess::harness::{run_experiment, ExperimentConfig, ExperimentKind, OutputFormat};
use dprocess::Sampler;

fn config(kind: ExperimentKind, n: usize, d: usize, trials: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(kind, n, d, trials, 42);
    cfg.workers = Some(1);
    cfg
}

#[test]
fn same_seed_gives_byte_identical_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, workers) in [1usize, 1, 8].into_iter().enumerate() {
        let mut cfg = config(ExperimentKind::Badballs, 300, 3, 700);
        cfg.workers = Some(workers);
        cfg.checkpoints_t = vec![1, 5, 50];
        cfg.checkpoints_m = vec![0, 100, 2000];
        cfg.output = Some(dir.path().join(format!("run{i}.jsonl")));
        cfg.report = Some(dir.path().join(format!("report{i}.csv")));
        run_experiment(&cfg).unwrap();
        // The header embeds the config, whose worker count and paths differ.
        let jsonl = std::fs::read_to_string(cfg.output.as_ref().unwrap()).unwrap();
        let body: Vec<&str> = jsonl.lines().skip(1).collect();
        outputs.push((body.join("\n"), std::fs::read(cfg.report.as_ref().unwrap()).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn identical_config_reproduces_every_byte() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(ExperimentKind::TailPoisson, 500, 2, 100);
    cfg.output = Some(dir.path().join("a.jsonl"));
    run_experiment(&cfg).unwrap();
    let first = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    run_experiment(&cfg).unwrap();
    assert_eq!(first, std::fs::read(dir.path().join("a.jsonl")).unwrap());
}

#[test]
fn worker_count_does_not_change_the_report() {
    for kind in dprocess::harness::ExperimentKind::ALL {
        let n = if kind == ExperimentKind::Equivalence { 6 } else { 200 };
        let mut a = config(kind, n, 3, 600);
        let mut b = a.clone();
        a.workers = Some(1);
        b.workers = Some(8);
        assert_eq!(run_experiment(&a).unwrap(), run_experiment(&b).unwrap(), "{kind}");
    }
}

#[test]
fn jsonl_records_carry_schema_and_footer() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(ExperimentKind::Survival, 100, 2, 5);
    cfg.output = Some(dir.path().join("s.jsonl"));
    run_experiment(&cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join("s.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0]["record"], "header");
    assert!(lines[0]["rng"].as_str().unwrap().contains("xoshiro"));
    for (i, line) in lines[1..6].iter().enumerate() {
        assert_eq!(line["record"], "trial");
        assert_eq!(line["schema_version"], 1);
        assert_eq!(line["trial"], i as u64);
        let rec: dprocess::TrajectoryRecord = serde_json::from_value(line.clone()).unwrap();
        assert_eq!(rec.n, 100);
    }
    assert_eq!(lines[6]["record"], "footer");
    assert_eq!(lines[6]["complete"], true);
    assert_eq!(lines[6]["trials_written"], 5);
}

#[test]
fn csv_records_have_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(ExperimentKind::DegreeProfile, 100, 3, 4);
    cfg.format = OutputFormat::Csv;
    cfg.output = Some(dir.path().join("p.csv"));
    run_experiment(&cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, dprocess::harness::TRIAL_CSV_HEADER);
    let width = header.split(',').count();
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.last().unwrap(), &"#footer,complete=true,trials_written=4");
    // Three default edge checkpoints per trial.
    assert_eq!(body.len(), 4 * 3 + 1);
    for row in &body[..body.len() - 1] {
        assert_eq!(row.split(',').count(), width, "{row}");
    }
}

#[test]
fn two_vertices_never_saturate() {
    for trials in [1, 10, 37] {
        let report = run_experiment(&config(ExperimentKind::Saturation, 2, 2, trials)).unwrap();
        let row = report.metric("nonsat").next().unwrap();
        assert_eq!(row.value, 1.0);
        assert_eq!(row.samples, trials);
    }
}

#[test]
fn equivalence_report_includes_exact_rationals() {
    let mut cfg = config(ExperimentKind::Equivalence, 4, 2, 3000);
    cfg.mode = Some(Sampler::Faithful);
    let report = run_experiment(&cfg).unwrap();
    let nonsat = report.metric("nonsat").next().unwrap();
    assert_eq!(nonsat.exact.as_deref(), Some("4/15"));
    assert_eq!(report.metric("terminal_class").count(), 7);
    assert_eq!(report.metric("stray_terminal_count").next().unwrap().value, 0.0);
    assert!(report.metric("max_abs_z").next().unwrap().value < 5.0);
    let csv = report.to_csv();
    assert!(csv.starts_with(dprocess::harness::REPORT_CSV_HEADER));
    assert!(csv.contains(",4/15,"));
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        config(ExperimentKind::Saturation, 100, 2, 0),
        config(ExperimentKind::Saturation, 1, 2, 5),
        config(ExperimentKind::Equivalence, 17, 2, 5),
        ExperimentConfig { mode: Some(Sampler::Graph), ..config(ExperimentKind::Badballs, 100, 2, 5) },
        ExperimentConfig { checkpoints_t: vec![101], ..config(ExperimentKind::Saturation, 100, 2, 5) },
        ExperimentConfig { checkpoints_m: vec![3], ..config(ExperimentKind::Saturation, 100, 2, 5) },
        ExperimentConfig { epsilon: 1.5, ..config(ExperimentKind::IndeptCheck, 100, 2, 5) },
    ];
    for cfg in bad {
        assert!(matches!(run_experiment(&cfg), Err(dprocess::Error::InvalidParameter(_))), "{cfg:?}");
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let mut cfg = config(ExperimentKind::Saturation, 50, 2, 5);
    cfg.output = Some("/nonexistent-dir/for/sure/out.jsonl".into());
    assert!(matches!(run_experiment(&cfg), Err(dprocess::Error::Io { .. })));
}

#[test]
fn config_round_trips_through_json() {
    let mut cfg = config(ExperimentKind::IndeptCheck, 1000, 3, 10);
    cfg.checkpoints_t = vec![3, 4];
    let text = serde_json::to_string(&cfg).unwrap();
    let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(cfg, back);
    let minimal: ExperimentConfig = serde_json::from_str(r#"{"kind": "tail-moments", "n": 50, "d": 3}"#).unwrap();
    assert_eq!(minimal.epsilon, 0.2);
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"kind": "saturation", "bogus": 1}"#).is_err());
}
