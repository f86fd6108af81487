//! Exhaustive search over all sparsity patterns of given cardinalities.

use itertools::Itertools;
use rayon::prelude::*;

use crate::cca::{solve_on_pattern, CcaSolution};
use crate::error::{Error, Result};
use crate::model::{CovarianceTriple, SparsityPattern};
use crate::num::Real;

pub const DEFAULT_BUDGET: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    /// Maximum number of patterns a single search may visit.
    pub budget: u128,
    pub parallel: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, parallel: false }
    }
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of patterns with `|I| = k_a`, `|J| = k_b`.
pub fn pattern_count(n: usize, m: usize, k_a: usize, k_b: usize) -> u128 {
    binomial(n, k_a).saturating_mul(binomial(m, k_b))
}

/// Best CCA over every pattern with `|I| = k_a` and `|J| = k_b`.
///
/// Patterns are visited in lexicographic order of `(I, J)` and the first
/// strictly best one wins.
pub fn exhaustive_sparse_cca<T: Real>(
    cov: &CovarianceTriple<T>,
    k_a: usize,
    k_b: usize,
    options: &OracleOptions,
) -> Result<CcaSolution<T>> {
    let (n, m) = (cov.n(), cov.m());
    if k_a == 0 || k_b == 0 || k_a > n || k_b > m {
        return Err(Error::input(format!("cardinalities ({k_a}, {k_b}) invalid for dimensions ({n}, {m})")));
    }
    let count = pattern_count(n, m, k_a, k_b);
    if count > options.budget {
        return Err(Error::Budget { patterns: count, budget: options.budget });
    }
    let xs: Vec<Vec<usize>> = (0..n).combinations(k_a).collect();
    let ys: Vec<Vec<usize>> = (0..m).combinations(k_b).collect();
    let pattern_at = |p: usize| SparsityPattern {
        x: xs[p / ys.len()].clone(),
        y: ys[p % ys.len()].clone(),
    };
    let total = xs.len() * ys.len();
    let rho_at = |p: usize| solve_on_pattern(cov, &pattern_at(p)).map(|s| s.rho);
    let rhos: Vec<Result<T>> = if options.parallel {
        (0..total).into_par_iter().map(rho_at).collect()
    } else {
        (0..total).map(rho_at).collect()
    };

    let mut best: Option<(usize, T)> = None;
    for (p, r) in rhos.into_iter().enumerate() {
        let rho = r?;
        if best.is_none_or(|(_, b)| rho > b) {
            best = Some((p, rho));
        }
    }
    let (p, _) = best.expect("at least one pattern");
    solve_on_pattern(cov, &pattern_at(p))
}

/// Optimal correlation at one total cardinality.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint<T> {
    pub k_a: usize,
    pub k_b: usize,
    pub solution: CcaSolution<T>,
}

impl<T: Real> CurvePoint<T> {
    pub fn total(&self) -> usize {
        self.k_a + self.k_b
    }

    pub fn rho(&self) -> T {
        self.solution.rho
    }
}

/// For every total cardinality `t` in `2..=max_total`, the best oracle
/// solution over all splits `k_a + k_b = t` (smallest `k_a` on ties).
pub fn oracle_curve<T: Real>(
    cov: &CovarianceTriple<T>,
    max_total: usize,
    options: &OracleOptions,
) -> Result<Vec<CurvePoint<T>>> {
    let (n, m) = (cov.n(), cov.m());
    let max_total = max_total.min(n + m);
    let mut out = Vec::new();
    for t in 2..=max_total {
        let lo = t.saturating_sub(m).max(1);
        let hi = (t - 1).min(n);
        let mut best: Option<CurvePoint<T>> = None;
        for k_a in lo..=hi {
            let sol = exhaustive_sparse_cca(cov, k_a, t - k_a, options)?;
            if best.as_ref().is_none_or(|b| sol.rho > b.rho()) {
                best = Some(CurvePoint { k_a, k_b: t - k_a, solution: sol });
            }
        }
        out.extend(best);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cca::solve_cca;
    use crate::random::wishart_sample;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(20, 5), 15504);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(pattern_count(20, 20, 5, 5), 15504 * 15504);
    }

    #[test]
    fn budget_refusal_reports_count() {
        let c = wishart_sample::<f64>(1, 20, 20, 40).unwrap();
        match exhaustive_sparse_cca(&c, 5, 5, &OracleOptions::default()) {
            Err(Error::Budget { patterns, budget }) => {
                assert_eq!(patterns, 240_374_016);
                assert_eq!(budget, DEFAULT_BUDGET);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn full_cardinality_is_plain_cca() {
        let c = wishart_sample::<f64>(3, 3, 4, 7).unwrap();
        let o = exhaustive_sparse_cca(&c, 3, 4, &OracleOptions::default()).unwrap();
        assert_eq!(o.rho, solve_cca(&c).unwrap().rho);
    }

    #[test]
    fn parallel_matches_sequential() {
        let c = wishart_sample::<f64>(8, 5, 5, 10).unwrap();
        let seq = exhaustive_sparse_cca(&c, 2, 3, &OracleOptions::default()).unwrap();
        let par = exhaustive_sparse_cca(&c, 2, 3, &OracleOptions { parallel: true, ..Default::default() }).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn curve_endpoints_and_monotonicity() {
        let c = wishart_sample::<f64>(11, 4, 4, 8).unwrap();
        let curve = oracle_curve(&c, 8, &OracleOptions::default()).unwrap();
        assert_eq!(curve.len(), 7);
        assert_eq!(curve[0].total(), 2);
        assert!((curve[6].rho() - solve_cca(&c).unwrap().rho).abs() < 1e-12);
        for w in curve.windows(2) {
            assert!(w[1].rho() >= w[0].rho() - 1e-12);
        }
    }
}
