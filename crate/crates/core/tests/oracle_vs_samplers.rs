//! Cross-checks of the exact oracle against the samplers at small sizes.

use dprocess::oracle::Oracle;
use dprocess::{BinProcess, CheckpointKind, Checkpoints, GraphProcess, Sampler};
use num_traits::ToPrimitive;
use std::collections::BTreeMap;

fn within_five_sigma(count: u64, trials: u64, p: f64) -> bool {
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    (count as f64 / trials as f64 - p).abs() <= 5.0 * sigma + 1e-12
}

#[test]
fn degree_counts_mid_process_match_the_oracle() {
    // d = 3 on six vertices, after four edges.
    let (n, d, s) = (6, 3, 4u64);
    let exact = Oracle::new(n, d).unwrap().exact_degree_count_distribution(s).unwrap();
    assert_eq!(exact.reach_probability.to_f64(), Some(1.0));
    let trials = 40_000u64;
    let cps = Checkpoints { s: vec![s], ..Default::default() };
    for mode in [Sampler::Graph, Sampler::Faithful, Sampler::Accelerated] {
        let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for seed in 0..trials {
            let rec = match mode {
                Sampler::Graph => GraphProcess::new(n, d, seed).unwrap().run(&cps, false),
                _ => BinProcess::new(n, d, seed, mode).unwrap().run(&cps, false),
            }
            .unwrap();
            let row = rec.row(CheckpointKind::Edges, s).unwrap();
            *counts.entry(row.degree_counts.clone()).or_insert(0) += 1;
        }
        for (profile, p) in &exact.entries {
            let count = counts.get(profile).copied().unwrap_or(0);
            assert!(within_five_sigma(count, trials, p.to_f64().unwrap()), "{mode} {profile:?}");
        }
        assert!(counts.keys().all(|k| exact.entries.contains_key(k)), "{mode}");
    }
}

#[test]
fn final_edge_count_law_for_d_three() {
    let (n, d) = (7, 3);
    let exact = Oracle::new(n, d).unwrap().exact_outcome_distribution().unwrap();
    let big_n = (n * d / 2) as u64;
    let trials = 30_000u64;
    for mode in [Sampler::Graph, Sampler::Accelerated] {
        let mut by_edges = vec![0u64; big_n as usize + 1];
        for seed in 0..trials {
            let rec = match mode {
                Sampler::Graph => GraphProcess::new(n, d, seed).unwrap().run(&Checkpoints::default(), true),
                _ => BinProcess::new(n, d, seed, mode).unwrap().run(&Checkpoints::default(), true),
            }
            .unwrap();
            by_edges[rec.final_edges as usize] += 1;
        }
        for (k, &count) in by_edges.iter().enumerate() {
            let p = exact.edge_count_probability(k).to_f64().unwrap();
            assert!(within_five_sigma(count, trials, p), "{mode} k={k}");
        }
    }
}

#[test]
fn intermediate_graph_law_matches_marginal() {
    let oracle = Oracle::new(5, 2).unwrap();
    let (dist, reach) = oracle.exact_graph_distribution(2).unwrap();
    assert_eq!(reach.to_f64(), Some(1.0));
    // Two disjoint edges or a path of length two; the total is one.
    assert_eq!(dist.total().to_f64(), Some(1.0));
    let trials = 30_000u64;
    let mut counts: BTreeMap<Vec<[u32; 2]>, u64> = BTreeMap::new();
    for seed in 0..trials {
        let mut p = GraphProcess::new(5, 2, seed).unwrap();
        p.step();
        p.step();
        *counts.entry(p.graph().edge_list()).or_insert(0) += 1;
    }
    for (edges, p) in &dist.entries {
        assert!(within_five_sigma(counts.get(edges).copied().unwrap_or(0), trials, p.to_f64().unwrap()));
    }
}
