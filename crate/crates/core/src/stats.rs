//! Estimators and comparators for checking predictions against samples.
//!
//! Accumulators here merge associatively and commutatively, so partial
//! results from separate workers combine into the same total.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analytics::{falling_factorial, poisson_pmf};
use crate::error::{invalid, Result};

/// Tail mass below which an unbounded law is truncated in [`tv_distance`].
pub const TAIL_CUTOFF: f64 = 1e-12;

/// A law on the nonnegative integers.
pub trait Pmf {
    fn prob(&self, k: u64) -> f64;

    /// Largest point of the support, or `None` when unbounded.
    fn support_max(&self) -> Option<u64>;
}

/// Counts of nonnegative integer observations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalPmf {
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl EmpiricalPmf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_samples(samples: impl IntoIterator<Item = u64>) -> Self {
        let mut pmf = Self::new();
        for x in samples {
            pmf.push(x);
        }
        pmf
    }

    pub fn push(&mut self, x: u64) {
        *self.counts.entry(x).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &EmpiricalPmf) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, k: u64) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn mean(&self) -> f64 {
        self.factorial_moment(1).unwrap_or(f64::NAN)
    }

    /// Mean of `[X]_k` over the observations.
    pub fn factorial_moment(&self, k: u32) -> Result<f64> {
        if self.total == 0 {
            return Err(invalid("factorial moment of an empty sample"));
        }
        let sum: f64 = self.counts.iter().map(|(&x, &c)| c as f64 * falling_factorial(x as f64, k)).sum();
        Ok(sum / self.total as f64)
    }
}

impl Pmf for EmpiricalPmf {
    fn prob(&self, k: u64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.count(k) as f64 / self.total as f64
    }

    fn support_max(&self) -> Option<u64> {
        Some(self.counts.keys().next_back().copied().unwrap_or(0))
    }
}

/// `Po(lambda)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Poisson(pub f64);

impl Pmf for Poisson {
    fn prob(&self, k: u64) -> f64 {
        poisson_pmf(self.0, k)
    }

    fn support_max(&self) -> Option<u64> {
        (self.0 == 0.0).then_some(0)
    }
}

/// Finite law given by its probabilities at `0, 1, ..`.
#[derive(Clone, Debug, PartialEq)]
pub struct FinitePmf(pub Vec<f64>);

impl Pmf for FinitePmf {
    fn prob(&self, k: u64) -> f64 {
        self.0.get(k as usize).copied().unwrap_or(0.0)
    }

    fn support_max(&self) -> Option<u64> {
        Some(self.0.len().saturating_sub(1) as u64)
    }
}

/// `(1/2) sum_k |p_k - q_k|`.
///
/// Points are visited from 0 until both finite supports are exhausted and
/// every unbounded law has less than [`TAIL_CUTOFF`] mass left; the leftover
/// tail masses then enter as one more term.
pub fn tv_distance(p: &dyn Pmf, q: &dyn Pmf) -> f64 {
    let (mut sum, mut mass_p, mut mass_q) = (0.0, 0.0, 0.0);
    let done = |law: &dyn Pmf, mass: f64, k: u64| match law.support_max() {
        Some(top) => k > top,
        None => 1.0 - mass < TAIL_CUTOFF,
    };
    let mut k = 0u64;
    while !(done(p, mass_p, k) && done(q, mass_q, k)) {
        let (a, b) = (p.prob(k), q.prob(k));
        sum += (a - b).abs();
        mass_p += a;
        mass_q += b;
        k += 1;
    }
    let rest_p = (1.0 - mass_p).max(0.0);
    let rest_q = (1.0 - mass_q).max(0.0);
    (0.5 * (sum + (rest_p - rest_q).abs())).clamp(0.0, 1.0)
}

/// Mean of `[x]_k` over `samples`.
pub fn factorial_moment(samples: &[u64], k: u32) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("factorial moment of an empty sample"));
    }
    let sum: f64 = samples.iter().map(|&x| falling_factorial(x as f64, k)).sum();
    Ok(sum / samples.len() as f64)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials >= 1 && successes <= trials, "need 0 <= successes <= trials, trials >= 1");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Fraction of samples within `[center - halfwidth, center + halfwidth]`.
pub fn window_coverage(samples: &[f64], center: f64, halfwidth: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let inside = samples.iter().filter(|&&x| (x - center).abs() <= halfwidth).count();
    inside as f64 / samples.len() as f64
}

/// Success counter with a Wilson interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn push(&mut self, success: bool) {
        self.successes += success as u64;
        self.trials += 1;
    }

    pub fn merge(&mut self, other: &Proportion) {
        self.successes += other.successes;
        self.trials += other.trials;
    }

    pub fn estimate(&self) -> f64 {
        if self.trials == 0 {
            f64::NAN
        } else {
            self.successes as f64 / self.trials as f64
        }
    }

    pub fn wilson(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.successes, self.trials, z)
    }
}

/// Streaming mean and variance (Welford, with Chan's pairwise merge).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.std_dev() / (self.count as f64).sqrt()
    }
}
