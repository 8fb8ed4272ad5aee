//! Exact laws of the graph d-process on tiny vertex sets.
//!
//! States are labeled graphs encoded as bitmasks over the `n(n-1)/2`
//! vertex pairs. The law after `s + 1` edges is obtained from the law after
//! `s` edges by splitting the mass of every state evenly over its allowed
//! pairs; identical successor states are merged. States without an allowed
//! pair are terminal. All arithmetic is exact.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};

/// Default cap on the number of memoized states across all levels.
pub const DEFAULT_STATE_BUDGET: usize = 10_000_000;

/// Largest `n` whose pair set fits the 128-bit state encoding.
pub const MAX_VERTICES: usize = 16;

/// Which moment of the process a distribution describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepIndex {
    Terminal,
    Edges(u64),
}

/// Exact law over labeled graphs, keyed by sorted edge lists.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    pub n: usize,
    pub d: usize,
    pub step: StepIndex,
    pub entries: BTreeMap<Vec<[u32; 2]>, BigRational>,
}

/// Exact law of `(D_0, ..., D_d)` after `s` edges, conditioned on the
/// process reaching `s` edges.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeCountDistribution {
    pub n: usize,
    pub d: usize,
    pub s: u64,
    pub reach_probability: BigRational,
    pub entries: BTreeMap<Vec<u64>, BigRational>,
}

fn rational_json(p: &BigRational) -> Value {
    json!({
        "numerator": p.numer().to_string(),
        "denominator": p.denom().to_string(),
        "decimal": p.to_f64().unwrap_or(f64::NAN),
    })
}

/// `num/den` in lowest terms.
pub fn format_rational(p: &BigRational) -> String {
    if p.denom().is_one() {
        p.numer().to_string()
    } else {
        format!("{}/{}", p.numer(), p.denom())
    }
}

impl ExactDistribution {
    pub fn total(&self) -> BigRational {
        self.entries.values().fold(BigRational::zero(), |acc, p| acc + p)
    }

    pub fn probability(&self, edges: &[[u32; 2]]) -> BigRational {
        self.entries.get(edges).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Probability that the graph has exactly `k` edges.
    pub fn edge_count_probability(&self, k: usize) -> BigRational {
        self.entries
            .iter()
            .filter(|(e, _)| e.len() == k)
            .fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }

    pub fn to_json(&self) -> Value {
        let step = match self.step {
            StepIndex::Terminal => json!("terminal"),
            StepIndex::Edges(s) => json!(s),
        };
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(edges, p)| json!({ "edges": edges, "probability": rational_json(p) }))
            .collect();
        json!({ "n": self.n, "d": self.d, "step": step, "entries": entries })
    }
}

impl DegreeCountDistribution {
    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(counts, p)| json!({ "degree_counts": counts, "probability": rational_json(p) }))
            .collect();
        json!({
            "n": self.n,
            "d": self.d,
            "s": self.s,
            "reach_probability": rational_json(&self.reach_probability),
            "entries": entries,
        })
    }
}

/// Pair indexing for the bitmask encoding.
struct PairTable {
    n: usize,
    d: usize,
    pairs: Vec<(u32, u32)>,
}

impl PairTable {
    fn new(n: usize, d: usize) -> Self {
        let pairs = (0..n as u32)
            .flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)))
            .collect();
        Self { n, d, pairs }
    }

    fn degrees(&self, state: u128) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        self.for_each_edge(state, |u, v| {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        });
        deg
    }

    fn for_each_edge(&self, state: u128, mut f: impl FnMut(u32, u32)) {
        let mut bits = state;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            let (u, v) = self.pairs[i];
            f(u, v);
            bits &= bits - 1;
        }
    }

    fn allowed(&self, state: u128) -> Vec<usize> {
        let deg = self.degrees(state);
        self.pairs
            .iter()
            .enumerate()
            .filter(|&(i, &(u, v))| {
                state & (1u128 << i) == 0 && deg[u as usize] < self.d && deg[v as usize] < self.d
            })
            .map(|(i, _)| i)
            .collect()
    }

    fn edge_list(&self, state: u128) -> Vec<[u32; 2]> {
        let mut edges = Vec::with_capacity(state.count_ones() as usize);
        self.for_each_edge(state, |u, v| edges.push([u, v]));
        edges.sort_unstable();
        edges
    }

    fn degree_counts(&self, state: u128) -> Vec<u64> {
        let mut counts = vec![0u64; self.d + 1];
        for deg in self.degrees(state) {
            counts[deg] += 1;
        }
        counts
    }
}

type Level = HashMap<u128, BigRational>;

/// Exact enumerator for one `(n, d)`.
#[derive(Clone, Debug)]
pub struct Oracle {
    n: usize,
    d: usize,
    budget: usize,
}

impl Oracle {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("d must be at least 2, got {d}")));
        }
        if !(2..=MAX_VERTICES).contains(&n) {
            return Err(invalid(format!("oracle supports 2 <= n <= {MAX_VERTICES}, got {n}")));
        }
        Ok(Self { n, d, budget: DEFAULT_STATE_BUDGET })
    }

    /// Caps the number of memoized states.
    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    fn max_edges(&self) -> u64 {
        (self.n * self.d / 2) as u64
    }

    /// Walks the levels `0..=stop`, returning the level at `stop` (or the
    /// last nonempty one) and the terminal mass collected on the way.
    fn evolve(&self, table: &PairTable, stop: u64) -> Result<(Level, Level)> {
        let mut level: Level = HashMap::from([(0u128, BigRational::one())]);
        let mut terminal: Level = HashMap::new();
        let mut stored = 1usize;
        for _ in 0..stop {
            let mut next: Level = HashMap::new();
            for (state, p) in &level {
                let allowed = table.allowed(*state);
                if allowed.is_empty() {
                    *terminal.entry(*state).or_insert_with(BigRational::zero) += p;
                    continue;
                }
                let share = p / BigRational::from_integer(BigInt::from(allowed.len()));
                for i in allowed {
                    *next.entry(state | (1u128 << i)).or_insert_with(BigRational::zero) += &share;
                }
            }
            stored += next.len() + terminal.len();
            if stored > self.budget {
                return Err(Error::BudgetExceeded { n: self.n, d: self.d, budget: self.budget });
            }
            level = next;
            if level.is_empty() {
                break;
            }
        }
        Ok((level, terminal))
    }

    /// Exact law of the final graph.
    pub fn exact_outcome_distribution(&self) -> Result<ExactDistribution> {
        let table = PairTable::new(self.n, self.d);
        let (rest, mut terminal) = self.evolve(&table, self.max_edges() + 1)?;
        debug_assert!(rest.is_empty());
        let _ = rest;
        let entries = terminal
            .drain()
            .map(|(state, p)| (table.edge_list(state), p))
            .collect();
        Ok(ExactDistribution { n: self.n, d: self.d, step: StepIndex::Terminal, entries })
    }

    /// Exact probability that the final graph fails to saturate.
    pub fn exact_nonsaturation_probability(&self) -> Result<BigRational> {
        let dist = self.exact_outcome_distribution()?;
        let mut total = BigRational::zero();
        for (edges, p) in &dist.entries {
            let mut deg = vec![0usize; self.n];
            for &[u, v] in edges {
                deg[u as usize] += 1;
                deg[v as usize] += 1;
            }
            let short: Vec<usize> = deg.into_iter().filter(|&k| k < self.d).collect();
            let saturated = short.is_empty() || (short.len() == 1 && short[0] == self.d - 1);
            if !saturated {
                total += p;
            }
        }
        Ok(total)
    }

    /// Exact law of the graph after `s` edges, conditioned on reaching `s`,
    /// with the probability of reaching it.
    pub fn exact_graph_distribution(&self, s: u64) -> Result<(ExactDistribution, BigRational)> {
        if s > self.max_edges() {
            return Err(invalid(format!("s = {s} exceeds N = {}", self.max_edges())));
        }
        let table = PairTable::new(self.n, self.d);
        let (level, _) = self.evolve(&table, s)?;
        let reach = level.values().fold(BigRational::zero(), |acc, p| acc + p);
        let entries = if reach.is_zero() {
            BTreeMap::new()
        } else {
            level.into_iter().map(|(state, p)| (table.edge_list(state), p / &reach)).collect()
        };
        Ok((ExactDistribution { n: self.n, d: self.d, step: StepIndex::Edges(s), entries }, reach))
    }

    /// Exact law of `(D_0, ..., D_d)` after `s` edges.
    pub fn exact_degree_count_distribution(&self, s: u64) -> Result<DegreeCountDistribution> {
        if s > self.max_edges() {
            return Err(invalid(format!("s = {s} exceeds N = {}", self.max_edges())));
        }
        let table = PairTable::new(self.n, self.d);
        let (level, _) = self.evolve(&table, s)?;
        let reach = level.values().fold(BigRational::zero(), |acc, p| acc + p);
        let mut entries: BTreeMap<Vec<u64>, BigRational> = BTreeMap::new();
        if !reach.is_zero() {
            for (state, p) in level {
                *entries.entry(table.degree_counts(state)).or_insert_with(BigRational::zero) += p / &reach;
            }
        }
        Ok(DegreeCountDistribution { n: self.n, d: self.d, s, reach_probability: reach, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn two_vertices() {
        let o = Oracle::new(2, 2).unwrap();
        let dist = o.exact_outcome_distribution().unwrap();
        assert_eq!(dist.entries.len(), 1);
        assert_eq!(dist.probability(&[[0, 1]]), BigRational::one());
        assert_eq!(o.exact_nonsaturation_probability().unwrap(), BigRational::one());
    }

    #[test]
    fn three_vertices_always_triangle() {
        let o = Oracle::new(3, 2).unwrap();
        let dist = o.exact_outcome_distribution().unwrap();
        assert_eq!(dist.probability(&[[0, 1], [0, 2], [1, 2]]), BigRational::one());
        assert!(o.exact_nonsaturation_probability().unwrap().is_zero());
        let dc = o.exact_degree_count_distribution(2).unwrap();
        assert_eq!(dc.entries.get(&vec![0, 2, 1]), Some(&BigRational::one()));
    }

    #[test]
    fn four_vertices() {
        let o = Oracle::new(4, 2).unwrap();
        let dist = o.exact_outcome_distribution().unwrap();
        assert_eq!(dist.total(), BigRational::one());
        assert_eq!(dist.edge_count_probability(3), ratio(4, 15));
        assert_eq!(dist.edge_count_probability(4), ratio(11, 15));
        assert_eq!(o.exact_nonsaturation_probability().unwrap(), ratio(4, 15));
        // Each of the 4 triangle + isolated vertex outcomes is equally likely.
        assert_eq!(dist.probability(&[[0, 1], [0, 2], [1, 2]]), ratio(1, 15));
        let dc = o.exact_degree_count_distribution(3).unwrap();
        assert_eq!(dc.reach_probability, BigRational::one());
        assert_eq!(dc.entries.get(&vec![1, 0, 3]), Some(&ratio(4, 15)));
        assert_eq!(dc.entries.get(&vec![0, 2, 2]), Some(&ratio(11, 15)));
    }

    #[test]
    fn start_is_empty_graph() {
        for (n, d) in [(4, 2), (5, 3), (6, 2)] {
            let dc = Oracle::new(n, d).unwrap().exact_degree_count_distribution(0).unwrap();
            let mut expected = vec![0u64; d + 1];
            expected[0] = n as u64;
            assert_eq!(dc.entries.get(&expected), Some(&BigRational::one()));
        }
    }

    #[test]
    fn mass_is_exactly_one_at_every_level() {
        let o = Oracle::new(6, 2).unwrap();
        for s in 0..=6 {
            let dc = o.exact_degree_count_distribution(s).unwrap();
            if dc.reach_probability.is_zero() {
                assert!(dc.entries.is_empty());
                continue;
            }
            let total = dc.entries.values().fold(BigRational::zero(), |a, p| a + p);
            assert_eq!(total, BigRational::one());
        }
        assert_eq!(o.exact_outcome_distribution().unwrap().total(), BigRational::one());
    }

    #[test]
    fn terminal_states_are_stuck() {
        let o = Oracle::new(6, 3).unwrap();
        let table = PairTable::new(6, 3);
        for edges in o.exact_outcome_distribution().unwrap().entries.keys() {
            let mut state = 0u128;
            for &[u, v] in edges {
                let i = table.pairs.iter().position(|&p| p == (u, v)).unwrap();
                state |= 1 << i;
            }
            assert!(table.allowed(state).is_empty());
        }
    }

    #[test]
    fn degree_marginals_agree_with_terminal_law() {
        // Terminal mass with k edges equals P(reach k) - P(reach k + 1).
        let o = Oracle::new(6, 2).unwrap();
        let dist = o.exact_outcome_distribution().unwrap();
        for k in 0..=6u64 {
            let here = o.exact_degree_count_distribution(k).unwrap().reach_probability;
            let next = if k < 6 {
                o.exact_degree_count_distribution(k + 1).unwrap().reach_probability
            } else {
                BigRational::zero()
            };
            assert_eq!(dist.edge_count_probability(k as usize), here - next);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let o = Oracle::new(7, 2).unwrap().with_budget(10);
        assert!(matches!(o.exact_outcome_distribution(), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn rejects_large_n() {
        assert!(Oracle::new(17, 2).is_err());
        assert!(Oracle::new(5, 1).is_err());
    }

    #[test]
    fn json_export_carries_exact_strings() {
        let v = Oracle::new(4, 2).unwrap().exact_outcome_distribution().unwrap().to_json();
        assert_eq!(v["step"], "terminal");
        let p = &v["entries"][0]["probability"];
        assert!(p["numerator"].is_string() && p["denominator"].is_string());
    }
}
