use crate::cca::{pair_correlation, solve_on_pattern, CcaSolution};
use crate::error::{Block, Error, Result, Side};
use crate::linalg::IncrementalCholesky;
use crate::model::{CovarianceTriple, SparsityPattern};
use crate::num::{tol, Real};

use super::bounds::{factor_of, push_index, BoundContext, SideView};
use super::{candidates, evaluate, first_max, GreedyConfig, Mode, Move, PathEntry, PathStats, SparsityPath};

/// Bounds at or below this are treated as zero when deciding whether an
/// approximate step carries any information.
const ZERO_BOUND_TOL: f64 = 1e-12;

/// Best single pair `(i, j)` by `|Σxy[i, j]| / √(Σx[i, i]·Σy[j, j])`,
/// ties to the smallest `i` then `j`, with its 1×1 solution.
pub fn seed_pair<T: Real>(cov: &CovarianceTriple<T>) -> Result<(SparsityPattern, CcaSolution<T>)> {
    let m = cov.m();
    let scores = (0..cov.n()).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| pair_correlation(cov, i, j));
    let (best, _) = first_max(scores).ok_or_else(|| Error::input("empty covariance"))?;
    let pattern = SparsityPattern::new(vec![best / m], vec![best % m])?;
    let sol = solve_on_pattern(cov, &pattern)?;
    Ok((pattern, sol))
}

fn candidate_error(side: Side, index: usize, e: Error) -> Error {
    Error::Candidate { side, index, source: Box::new(e) }
}

fn exact_step<T: Real>(
    cov: &CovarianceTriple<T>,
    pattern: &SparsityPattern,
    config: &GreedyConfig,
    stats: &mut PathStats,
) -> Result<PathEntry<T>> {
    let cands = candidates((cov.n(), cov.m()), pattern, config);
    if cands.is_empty() {
        return Err(Error::input("pattern already at target cardinality"));
    }
    let results = evaluate(&cands, config.parallel, |side, k| solve_on_pattern(cov, &pattern.with(side, k)));
    stats.cca_solves += results.len();
    let mut sols = Vec::with_capacity(results.len());
    for (r, &(side, k)) in results.into_iter().zip(&cands) {
        sols.push(r.map_err(|e| candidate_error(side, k, e))?);
    }
    let (best, _) = first_max(sols.iter().map(|s| s.rho)).expect("non-empty candidates");
    let (side, index) = cands[best];
    let solution = sols.swap_remove(best);
    Ok(PathEntry {
        step: solution.pattern.total() - 2,
        action: Move::Add { side, index },
        pattern: solution.pattern.clone(),
        solution,
        bound_value: None,
    })
}

/// Selected-set factors carried along a forward run.
struct Factors<T> {
    x: IncrementalCholesky<T>,
    y: IncrementalCholesky<T>,
}

impl<T: Real> Factors<T> {
    fn of(cov: &CovarianceTriple<T>, pattern: &SparsityPattern) -> Result<Self> {
        Ok(Self {
            x: factor_of(cov.sigma_x(), pattern.x(), Block::SigmaX)?,
            y: factor_of(cov.sigma_y(), pattern.y(), Block::SigmaY)?,
        })
    }

    fn accept(&mut self, cov: &CovarianceTriple<T>, side: Side, index: usize) -> Result<()> {
        match side {
            Side::X => push_index(&mut self.x, cov.sigma_x(), index, Block::SigmaX),
            Side::Y => push_index(&mut self.y, cov.sigma_y(), index, Block::SigmaY),
        }
    }
}

fn approx_step<T: Real>(
    cov: &CovarianceTriple<T>,
    sol: &CcaSolution<T>,
    factors: &Factors<T>,
    config: &GreedyConfig,
    stats: &mut PathStats,
) -> Result<PathEntry<T>> {
    let pattern = &sol.pattern;
    let cands = candidates((cov.n(), cov.m()), pattern, config);
    if cands.is_empty() {
        return Err(Error::input("pattern already at target cardinality"));
    }
    // δ keeps b fixed and extends I; γ keeps a fixed and extends J.
    let ctx_x = BoundContext::new(SideView::x(cov), &factors.x, pattern.y(), sol.b.view());
    let ctx_y = BoundContext::new(SideView::y(cov), &factors.y, pattern.x(), sol.a.view());
    let bounds = evaluate(&cands, config.parallel, |side, k| match side {
        Side::X => ctx_x.bound(k),
        Side::Y => ctx_y.bound(k),
    });
    stats.bound_evaluations += bounds.len();

    let (best, value) = first_max(bounds.iter().map(|b| b.value)).expect("non-empty candidates");
    if !(value > tol::<T>(ZERO_BOUND_TOL)) {
        stats.exact_fallbacks += 1;
        return exact_step(cov, pattern, config, stats);
    }
    let (side, index) = cands[best];
    let next = pattern.with(side, index);
    stats.cca_solves += 1;
    let solution = solve_on_pattern(cov, &next).map_err(|e| candidate_error(side, index, e))?;
    Ok(PathEntry {
        step: next.total() - 2,
        action: Move::Add { side, index },
        pattern: next,
        solution,
        bound_value: Some(value),
    })
}

/// One exact forward move from `pattern`: solves a CCA for every
/// candidate and keeps the best (`x` side first, then smallest index on ties).
pub fn forward_step_exact<T: Real>(
    cov: &CovarianceTriple<T>,
    pattern: &SparsityPattern,
    config: &GreedyConfig,
) -> Result<PathEntry<T>> {
    config.validate(cov.n(), cov.m())?;
    pattern.check_bounds(cov.n(), cov.m())?;
    exact_step(cov, pattern, config, &mut PathStats::default())
}

/// One bound-driven forward move from the optimal solution `sol` on its
/// pattern: ranks candidates by δ/γ and solves a single CCA for the winner.
pub fn forward_step_approx<T: Real>(
    cov: &CovarianceTriple<T>,
    sol: &CcaSolution<T>,
    config: &GreedyConfig,
) -> Result<PathEntry<T>> {
    config.validate(cov.n(), cov.m())?;
    sol.pattern.check_bounds(cov.n(), cov.m())?;
    let factors = Factors::of(cov, &sol.pattern)?;
    approx_step(cov, sol, &factors, config, &mut PathStats::default())
}

pub(super) fn run_forward<T: Real>(
    cov: &CovarianceTriple<T>,
    config: &GreedyConfig,
    mut path: SparsityPath<T>,
) -> (SparsityPath<T>, Option<Error>) {
    let (pattern, solution) = match seed_pair(cov) {
        Ok(s) => s,
        Err(e) => return (path, Some(e)),
    };
    path.stats.cca_solves += 1;
    let Some(&x) = pattern.x().first() else { unreachable!() };
    let y = pattern.y()[0];
    path.entries.push(PathEntry {
        step: 0,
        action: Move::Seed { x, y },
        pattern: pattern.clone(),
        solution,
        bound_value: None,
    });

    let mut factors = match config.mode {
        Mode::Approximate => match Factors::of(cov, &pattern) {
            Ok(f) => Some(f),
            Err(e) => return (path, Some(e)),
        },
        Mode::Exact => None,
    };

    loop {
        let current = path.entries.last().expect("seeded");
        if current.pattern.card_x() >= config.k_a && current.pattern.card_y() >= config.k_b {
            return (path, None);
        }
        let step = match factors.as_mut() {
            None => exact_step(cov, &current.pattern, config, &mut path.stats),
            Some(f) => approx_step(cov, &current.solution, f, config, &mut path.stats).and_then(|entry| {
                if let Move::Add { side, index } = entry.action {
                    f.accept(cov, side, index)?;
                }
                Ok(entry)
            }),
        };
        match step {
            Ok(entry) => path.entries.push(entry),
            Err(e) => return (path, Some(e)),
        }
    }
}
