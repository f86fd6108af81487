use crate::cca::{solve_cca, solve_on_pattern};
use crate::error::{Error, Result};
use crate::model::{CovarianceTriple, SparsityPattern};
use crate::num::Real;

use super::{candidates, evaluate, first_max, trace_greedy, GreedyConfig, Move, PathEntry, SparsityPath};

/// Exact backward elimination from the full pattern down to `(k_a, k_b)`.
///
/// Each step removes the variable whose removal leaves the largest
/// correlation; ties go to the `x` side, then the largest index.
pub fn backward_greedy<T: Real>(cov: &CovarianceTriple<T>, config: &GreedyConfig) -> Result<SparsityPath<T>> {
    if config.direction != super::Direction::Backward {
        return Err(Error::input("backward_greedy requires a backward configuration"));
    }
    let (path, err) = trace_greedy(cov, config);
    err.map_or(Ok(path), Err)
}

pub(super) fn run_backward<T: Real>(
    cov: &CovarianceTriple<T>,
    config: &GreedyConfig,
    mut path: SparsityPath<T>,
) -> (SparsityPath<T>, Option<Error>) {
    let full = match solve_cca(cov) {
        Ok(s) => s,
        Err(e) => return (path, Some(e)),
    };
    path.stats.cca_solves += 1;
    path.entries.push(PathEntry {
        step: 0,
        action: Move::Full,
        pattern: SparsityPattern::full(cov.n(), cov.m()),
        solution: full,
        bound_value: None,
    });

    loop {
        let current = path.entries.last().expect("started");
        let cands = candidates((cov.n(), cov.m()), &current.pattern, config);
        if cands.is_empty() {
            return (path, None);
        }
        let pattern = current.pattern.clone();
        let step = current.step + 1;
        let results = evaluate(&cands, config.parallel, |side, k| solve_on_pattern(cov, &pattern.without(side, k)));
        path.stats.cca_solves += results.len();
        let mut sols = Vec::with_capacity(results.len());
        for (r, &(side, index)) in results.into_iter().zip(&cands) {
            match r {
                Ok(s) => sols.push(s),
                Err(e) => return (path, Some(Error::Candidate { side, index, source: Box::new(e) })),
            }
        }
        let (best, _) = first_max(sols.iter().map(|s| s.rho)).expect("non-empty candidates");
        let (side, index) = cands[best];
        let solution = sols.swap_remove(best);
        path.entries.push(PathEntry {
            step,
            action: Move::Remove { side, index },
            pattern: solution.pattern.clone(),
            solution,
            bound_value: None,
        });
    }
}
