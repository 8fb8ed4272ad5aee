//! Closed-form predictions for the d-process.
//!
//! With `mu = x / n`, `beta_i(x) = n mu^i e^{-mu} / i!` approximates the
//! number of bins holding `i` balls after `x` balls, and
//! `ell(x) = dn/2 - (1/2) sum_{i<d} (d - i) beta_i(x)` the number of edges
//! present by then. `ell` is strictly increasing with derivative
//! `tau(x) / 2n`, where `tau = sum_{i<d} beta_i`, so the number of balls
//! matching `s` edges is `ell^{-1}(s)`. Near the end, at deficit `t`, the
//! count of vertices of degree `j < d - 1` is close to Poisson with mean
//! `f_j(d, t, n) = 2 [d-1]_{d-1-j} t / (log n)^{d-1-j}`.
//!
//! All logarithms are natural.

use statrs::function::factorial::ln_factorial;

use crate::error::{invalid, Result};

/// Above this `mu` the weight `e^{-mu}` is taken in log space.
const LOG_SPACE_MU: f64 = 700.0;

/// `[x]_k = x (x - 1) ... (x - k + 1)`, with `[x]_0 = 1`.
pub fn falling_factorial(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (x - i as f64))
}

/// `P(Po(lambda) = i)`.
pub fn poisson_pmf(lambda: f64, i: u64) -> f64 {
    if lambda == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    (i as f64 * lambda.ln() - lambda - ln_factorial(i)).exp()
}

/// `P(Z_d(lambda) = i)` for the Poisson law with all mass at `>= d` moved
/// onto `d`. The top atom is computed as a complement.
pub fn truncated_poisson_pmf(d: u64, lambda: f64, i: u64) -> f64 {
    match i.cmp(&d) {
        std::cmp::Ordering::Less => poisson_pmf(lambda, i),
        std::cmp::Ordering::Equal => {
            let below: f64 = (0..d).map(|k| poisson_pmf(lambda, k)).sum();
            (1.0 - below).max(0.0)
        }
        std::cmp::Ordering::Greater => 0.0,
    }
}

/// Predictions for `n` vertices and degree cap `d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticModel {
    n: usize,
    d: usize,
    log_n: f64,
}

impl AnalyticModel {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n < 1 {
            return Err(invalid("n must be positive"));
        }
        if d < 2 {
            return Err(invalid(format!("d must be at least 2, got {d}")));
        }
        Ok(Self { n, d, log_n: (n as f64).ln() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn log_n(&self) -> f64 {
        self.log_n
    }

    /// `N = floor(dn / 2)`.
    pub fn max_edges(&self) -> u64 {
        (self.d as u64 * self.n as u64) / 2
    }

    /// `dn / 2`, the supremum of `ell`.
    pub fn half_degree_sum(&self) -> f64 {
        self.d as f64 * self.n as f64 / 2.0
    }

    /// `beta_i(n, x) = n mu^i e^{-mu} / i!` with `mu = x / n`.
    pub fn beta(&self, x: f64, i: usize) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(invalid(format!("x must be nonnegative, got {x}")));
        }
        Ok(self.beta_unchecked(x, i))
    }

    fn beta_unchecked(&self, x: f64, i: usize) -> f64 {
        let n = self.n as f64;
        let mu = x / n;
        if mu == 0.0 {
            return if i == 0 { n } else { 0.0 };
        }
        if mu > LOG_SPACE_MU {
            let log_beta = n.ln() + i as f64 * mu.ln() - mu - ln_factorial(i as u64);
            // exp underflows to exactly 0 below the representable range.
            return log_beta.exp();
        }
        let mut term = n * (-mu).exp();
        for k in 1..=i {
            term *= mu / k as f64;
        }
        term
    }

    /// `ell(n, x) = dn/2 - (1/2) sum_{i<d} (d - i) beta_i(x)`.
    pub fn ell(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(invalid(format!("x must be nonnegative, got {x}")));
        }
        Ok(self.ell_unchecked(x))
    }

    fn ell_unchecked(&self, x: f64) -> f64 {
        let deficit: f64 = (0..self.d)
            .map(|i| (self.d - i) as f64 * self.beta_unchecked(x, i))
            .sum();
        self.half_degree_sum() - 0.5 * deficit
    }

    /// `tau(x) = sum_{i<d} beta_i(x)`; `ell'(x) = tau(x) / 2n`.
    pub fn tau(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(invalid(format!("x must be nonnegative, got {x}")));
        }
        Ok((0..self.d).map(|i| self.beta_unchecked(x, i)).sum())
    }

    /// The `x >= 0` with `ell(x) = s`, for `0 <= s < dn/2`.
    ///
    /// The bracket starts at `[0, n]` and doubles its upper end until it
    /// covers `s`; bisection then runs until `|ell(x) - s|` is within
    /// `max(1e-9 dn/2, 1e-9)`, for at most 200 iterations.
    pub fn ell_inverse(&self, s: f64) -> Result<f64> {
        let top = self.half_degree_sum();
        if s.is_nan() || s < 0.0 || s >= top {
            return Err(invalid(format!("s = {s} outside [0, {top})")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let tol = (1e-9 * top).max(1e-9);
        let (mut lo, mut hi) = (0.0f64, self.n as f64);
        while self.ell_unchecked(hi) < s {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(invalid(format!("no finite preimage found for s = {s}")));
            }
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let value = self.ell_unchecked(mid);
            if (value - s).abs() <= tol {
                break;
            }
            if value < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(mid)
    }

    /// `f_j(d, t, n) = 2 [d-1]_{d-1-j} t / (log n)^{d-1-j}` for `0 <= j <= d - 2`.
    pub fn f(&self, t: f64, j: usize) -> Result<f64> {
        if j + 2 > self.d {
            return Err(invalid(format!("j = {j} outside [0, d - 2] for d = {}", self.d)));
        }
        let power = (self.d - 1 - j) as u32;
        Ok(2.0 * falling_factorial((self.d - 1) as f64, power) * t / self.log_n.powi(power as i32))
    }

    /// Deficit at which `f_j` equals `target`.
    pub fn deficit_for_f(&self, target: f64, j: usize) -> Result<f64> {
        Ok(target / self.f(1.0, j)?)
    }

    /// Poisson parameter of the limiting per-vertex degree law after `s`
    /// edges, taken as `ell^{-1}(s) / n`.
    pub fn degree_law_lambda(&self, s: f64) -> Result<f64> {
        Ok(self.ell_inverse(s)? / self.n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn beta_at_zero_and_one() {
        let m = AnalyticModel::new(1000, 3).unwrap();
        assert_eq!(m.beta(0.0, 0).unwrap(), 1000.0);
        assert_eq!(m.beta(0.0, 1).unwrap(), 0.0);
        assert_eq!(m.beta(0.0, 2).unwrap(), 0.0);
        assert!(rel(m.beta(1000.0, 1).unwrap(), 1000.0 * (-1.0f64).exp()) < 1e-15);
        assert!(m.beta(-1.0, 0).is_err());
    }

    #[test]
    fn beta_is_finite_for_huge_mu() {
        let m = AnalyticModel::new(10, 3).unwrap();
        let b = m.beta(10.0 * 800.0, 2).unwrap();
        assert!(b >= 0.0 && b.is_finite());
        assert_eq!(m.beta(10.0 * 1e6, 2).unwrap(), 0.0);
    }

    #[test]
    fn ell_limits() {
        let m = AnalyticModel::new(500, 4).unwrap();
        assert_eq!(m.ell(0.0).unwrap(), 0.0);
        let far = m.ell(500.0 * 200.0).unwrap();
        assert!((far - 1000.0).abs() < 1e-9);
        assert!(far <= 1000.0);
    }

    #[test]
    fn ell_derivative_matches_finite_differences() {
        for d in [2, 3, 5] {
            let n = 10_000usize;
            let m = AnalyticModel::new(n, d).unwrap();
            let h = 1e-4 * n as f64;
            for mu in [0.05, 0.5, 1.0, 2.0, 4.0, 8.0] {
                let x = mu * n as f64;
                let fd = (m.ell(x + h).unwrap() - m.ell(x - h).unwrap()) / (2.0 * h);
                let exact = m.tau(x).unwrap() / (2.0 * n as f64);
                assert!(rel(fd, exact) < 1e-6, "d={d} mu={mu}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn ell_inverse_round_trip() {
        for d in [2, 3, 5] {
            let m = AnalyticModel::new(10_000, d).unwrap();
            let top = m.half_degree_sum();
            assert_eq!(m.ell_inverse(0.0).unwrap(), 0.0);
            for frac in [0.1, 0.5, 0.9] {
                let s = frac * top;
                let x = m.ell_inverse(s).unwrap();
                assert!((m.ell(x).unwrap() - s).abs() <= 1e-9 * top);
            }
            assert!(m.ell_inverse(top).is_err());
            assert!(m.ell_inverse(-1.0).is_err());
        }
    }

    #[test]
    fn f_examples() {
        let n = (10.0f64).exp().round() as usize;
        let m = AnalyticModel::new(n, 3).unwrap();
        let f = m.f(10.0, 0).unwrap();
        let expected = 2.0 * 2.0 * 10.0 / m.log_n().powi(2);
        assert!(rel(f, expected) < 1e-15);
        // Rounding n moves log n off 10 by 2.1e-5, so f is 0.4 to about 2e-6.
        assert!((f - 0.4).abs() < 1e-5);
        // j = d - 2 reduces to 2 (d - 1) t / log n.
        for d in 2..7 {
            let m = AnalyticModel::new(1000, d).unwrap();
            let f = m.f(7.0, d - 2).unwrap();
            assert!(rel(f, 2.0 * (d - 1) as f64 * 7.0 / m.log_n()) < 1e-15);
            assert!(m.f(7.0, d - 1).is_err());
        }
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(5.0, 2), 20.0);
        assert_eq!(falling_factorial(3.7, 0), 1.0);
        assert_eq!(falling_factorial(2.0, 3), 0.0);
    }

    #[test]
    fn poisson_examples() {
        assert!(rel(poisson_pmf(1.0, 0), (-1.0f64).exp()) < 1e-15);
        assert_eq!(poisson_pmf(0.0, 0), 1.0);
        assert_eq!(truncated_poisson_pmf(3, 0.0, 0), 1.0);
        assert_eq!(truncated_poisson_pmf(3, 0.0, 3), 0.0);
        for d in [2u64, 5] {
            for lambda in [0.5, 2.0, 10.0] {
                let total: f64 = (0..=d).map(|i| truncated_poisson_pmf(d, lambda, i)).sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn beta_recursion_identity(n in 10usize..1_000_000, mu in 1e-3f64..50.0, d in 2usize..8, i_off in 0usize..8) {
            let m = AnalyticModel::new(n, d).unwrap();
            let i = i_off % d;
            let x = mu * n as f64;
            let top = m.beta(x, d - 1).unwrap();
            let k = (d - 1 - i) as u32;
            let via = top * falling_factorial((d - 1) as f64, k) / mu.powi(k as i32);
            prop_assert!(rel(via, m.beta(x, i).unwrap()) < 1e-12);
        }

        #[test]
        fn ell_is_strictly_increasing_on_grid(n in 10usize..100_000, d in 2usize..7) {
            let m = AnalyticModel::new(n, d).unwrap();
            let mut prev = m.ell(0.0).unwrap();
            for k in 0..24 {
                let x = 2f64.powi(k) * n as f64 * 1e-6;
                let v = m.ell(x).unwrap();
                prop_assert!(v > prev);
                prop_assert!(m.tau(x).unwrap() > 0.0);
                prev = v;
            }
        }

        #[test]
        fn ell_inverse_is_monotone(a in 0.0f64..0.99, b in 0.0f64..0.99) {
            let m = AnalyticModel::new(5000, 3).unwrap();
            let top = m.half_degree_sum();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            prop_assert!(m.ell_inverse(lo * top).unwrap() < m.ell_inverse(hi * top).unwrap());
        }
    }
}
