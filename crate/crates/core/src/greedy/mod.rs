//! Greedy sparse CCA: forward selection (exact, or accelerated by
//! closed-form lower bounds on the gain in ρ²) and exact backward
//! elimination. Every run records the full sparsity path.

mod backward;
mod bounds;
mod forward;

pub use backward::backward_greedy;
pub use bounds::{bound_delta, bound_gamma, Bound, DEGENERATE_SCHUR_TOL};
pub use forward::{forward_step_approx, forward_step_exact, seed_pair};

use rayon::prelude::*;

use crate::cca::CcaSolution;
use crate::error::{Error, Result, Side};
use crate::model::{CovarianceTriple, SparsityPattern};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Solve a CCA for every candidate move.
    Exact,
    /// Rank candidates by the δ/γ lower bounds; one CCA per step.
    Approximate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyConfig {
    pub k_a: usize,
    pub k_b: usize,
    pub mode: Mode,
    pub direction: Direction,
    /// Evaluate the candidates of a step on the rayon pool. Results are
    /// identical to sequential evaluation.
    pub parallel: bool,
}

impl GreedyConfig {
    pub fn new(k_a: usize, k_b: usize, mode: Mode, direction: Direction) -> Self {
        Self { k_a, k_b, mode, direction, parallel: false }
    }

    pub fn forward(k_a: usize, k_b: usize, mode: Mode) -> Self {
        Self::new(k_a, k_b, mode, Direction::Forward)
    }

    pub fn backward(k_a: usize, k_b: usize) -> Self {
        Self::new(k_a, k_b, Mode::Exact, Direction::Backward)
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        if self.k_a == 0 || self.k_b == 0 {
            return Err(Error::input("target cardinalities must be at least 1"));
        }
        if self.k_a > n || self.k_b > m {
            return Err(Error::input(format!(
                "targets ({}, {}) exceed dimensions ({n}, {m})",
                self.k_a, self.k_b
            )));
        }
        if self.direction == Direction::Backward && self.mode == Mode::Approximate {
            return Err(Error::input("backward greedy is exact-only"));
        }
        Ok(())
    }

    fn room(&self, pattern: &SparsityPattern, side: Side) -> bool {
        match side {
            Side::X => pattern.card_x() < self.k_a,
            Side::Y => pattern.card_y() < self.k_b,
        }
    }

    fn excess(&self, pattern: &SparsityPattern, side: Side) -> bool {
        match side {
            Side::X => pattern.card_x() > self.k_a,
            Side::Y => pattern.card_y() > self.k_b,
        }
    }
}

/// What produced a path entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Forward start: the best single pair.
    Seed { x: usize, y: usize },
    /// Backward start: the full pattern.
    Full,
    Add { side: Side, index: usize },
    Remove { side: Side, index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathEntry<T> {
    pub step: usize,
    pub action: Move,
    pub pattern: SparsityPattern,
    pub solution: CcaSolution<T>,
    /// δ or γ that decided the move, in approximate mode.
    pub bound_value: Option<T>,
}

impl<T: Real> PathEntry<T> {
    pub fn rho(&self) -> T {
        self.solution.rho
    }
}

/// Instrumentation counters for one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PathStats {
    /// Full CCA solves (one per candidate in exact mode, one per step in approximate mode).
    pub cca_solves: usize,
    /// δ/γ evaluations.
    pub bound_evaluations: usize,
    /// Approximate steps where every bound vanished and an exact step was taken.
    pub exact_fallbacks: usize,
}

impl std::ops::AddAssign for PathStats {
    fn add_assign(&mut self, rhs: Self) {
        self.cca_solves += rhs.cca_solves;
        self.bound_evaluations += rhs.bound_evaluations;
        self.exact_fallbacks += rhs.exact_fallbacks;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsityPath<T> {
    /// Entry 0 is the seed (forward) or the full pattern (backward).
    pub entries: Vec<PathEntry<T>>,
    pub mode: Mode,
    pub direction: Direction,
    pub stats: PathStats,
}

impl<T: Real> SparsityPath<T> {
    pub fn seed_entry(&self) -> Option<&PathEntry<T>> {
        self.entries.first()
    }

    pub fn last(&self) -> Option<&PathEntry<T>> {
        self.entries.last()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The entry whose pattern has total cardinality `total`.
    pub fn at_total(&self, total: usize) -> Option<&PathEntry<T>> {
        self.entries.iter().find(|e| e.pattern.total() == total)
    }
}

/// Runs greedy selection to the targets in `config`.
pub fn run_greedy<T: Real>(cov: &CovarianceTriple<T>, config: &GreedyConfig) -> Result<SparsityPath<T>> {
    let (path, err) = trace_greedy(cov, config);
    match err {
        None => Ok(path),
        Some(e) => Err(e),
    }
}

/// Like [`run_greedy`] but keeps the successful prefix when a step fails.
pub fn trace_greedy<T: Real>(cov: &CovarianceTriple<T>, config: &GreedyConfig) -> (SparsityPath<T>, Option<Error>) {
    let empty = SparsityPath {
        entries: Vec::new(),
        mode: config.mode,
        direction: config.direction,
        stats: PathStats::default(),
    };
    if let Err(e) = config.validate(cov.n(), cov.m()) {
        return (empty, Some(e));
    }
    match config.direction {
        Direction::Forward => forward::run_forward(cov, config, empty),
        Direction::Backward => backward::run_backward(cov, config, empty),
    }
}

/// Candidate moves in tie-break order: all `x` moves before `y` moves.
/// Forward lists ascending indices outside the pattern with room on
/// their side; backward lists descending indices inside it.
fn candidates(cov_dims: (usize, usize), pattern: &SparsityPattern, config: &GreedyConfig) -> Vec<(Side, usize)> {
    let (n, m) = cov_dims;
    let mut out = Vec::new();
    for (side, dim, set) in [(Side::X, n, pattern.x()), (Side::Y, m, pattern.y())] {
        match config.direction {
            Direction::Forward if config.room(pattern, side) => {
                out.extend((0..dim).filter(|k| set.binary_search(k).is_err()).map(|k| (side, k)));
            }
            Direction::Backward if config.excess(pattern, side) => {
                out.extend(set.iter().rev().map(|&k| (side, k)));
            }
            _ => {}
        }
    }
    out
}

fn evaluate<R: Send, F>(cands: &[(Side, usize)], parallel: bool, f: F) -> Vec<R>
where
    F: Fn(Side, usize) -> R + Sync + Send,
{
    if parallel {
        cands.par_iter().map(|&(s, k)| f(s, k)).collect()
    } else {
        cands.iter().map(|&(s, k)| f(s, k)).collect()
    }
}

/// Index of the first strictly largest value.
fn first_max<T: Real>(values: impl IntoIterator<Item = T>) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (k, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            None if v.is_nan() => {}
            _ => best = Some((k, v)),
        }
    }
    best
}
