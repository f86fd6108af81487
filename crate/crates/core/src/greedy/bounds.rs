//! Lower bounds on the gain in ρ² from adding one variable.
//!
//! Keeping the other side's weights fixed at their optimum, the best
//! achievable ρ² on the extended side is a quadratic form whose
//! partitioned inverse splits into the current ρ² plus
//!
//! ```text
//! δᵢ = (wᵀ S⁻¹ s_i − c_i)² / (S_ii − s_iᵀ S⁻¹ s_i)
//! ```
//!
//! where `S` is the selected marginal block, `s_i` its column against the
//! candidate, `w = Σxy[I, J]·b` and `c_i = Σxy[i, J]·b` (and the mirror
//! image for the `y` side). With a Cholesky factor `L` of `S`, each
//! candidate costs one triangular solve.

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::cca::CcaSolution;
use crate::error::{Block, Error, Result};
use crate::linalg::IncrementalCholesky;
use crate::model::{CovarianceTriple, SparsityPattern};
use crate::num::{tol, Real};

/// Schur complements at or below this are treated as linear dependence.
pub const DEGENERATE_SCHUR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound<T> {
    /// Lower bound on the increase of ρ²; zero for degenerate candidates.
    pub value: T,
    /// The candidate is numerically dependent on the selected set.
    pub degenerate: bool,
}

/// One side of the problem viewed from the side being extended.
pub(crate) struct SideView<'a, T> {
    /// Marginal covariance of the extended side.
    pub marginal: ArrayView2<'a, T>,
    /// Cross covariance with rows on the extended side.
    pub cross: ArrayView2<'a, T>,
}

impl<'a, T: Real> SideView<'a, T> {
    pub fn x(cov: &'a CovarianceTriple<T>) -> Self {
        Self { marginal: cov.sigma_x(), cross: cov.sigma_xy() }
    }

    pub fn y(cov: &'a CovarianceTriple<T>) -> Self {
        Self { marginal: cov.sigma_y(), cross: cov.sigma_xy().reversed_axes() }
    }

    /// `cross · other_weights` over the other side's support, for every row.
    pub fn projected_cross(&self, other_set: &[usize], other_weights: ArrayView1<'_, T>) -> Array1<T> {
        Array1::from_shape_fn(self.cross.nrows(), |r| {
            other_set
                .iter()
                .zip(other_weights.iter())
                .map(|(&k, &w)| self.cross[[r, k]] * w)
                .sum()
        })
    }

    pub fn column_against(&self, factor: &IncrementalCholesky<T>, candidate: usize) -> Array1<T> {
        Array1::from_iter(factor.indices().iter().map(|&k| self.marginal[[k, candidate]]))
    }
}

/// Per-step quantities shared by every candidate on one side.
pub(crate) struct BoundContext<'a, T> {
    view: SideView<'a, T>,
    factor: &'a IncrementalCholesky<T>,
    projected: Array1<T>,
    whitened: Array1<T>,
}

impl<'a, T: Real> BoundContext<'a, T> {
    pub fn new(
        view: SideView<'a, T>,
        factor: &'a IncrementalCholesky<T>,
        other_set: &[usize],
        other_weights: ArrayView1<'_, T>,
    ) -> Self {
        let projected = view.projected_cross(other_set, other_weights);
        let w = Array1::from_iter(factor.indices().iter().map(|&k| projected[k]));
        let whitened = factor.solve_lower(w.view());
        Self { view, factor, projected, whitened }
    }

    pub fn bound(&self, candidate: usize) -> Bound<T> {
        let z = self.factor.solve_lower(self.view.column_against(self.factor, candidate).view());
        let schur = self.view.marginal[[candidate, candidate]] - z.dot(&z);
        if !(schur > tol::<T>(DEGENERATE_SCHUR_TOL)) {
            return Bound { value: T::zero(), degenerate: true };
        }
        let residual = self.whitened.dot(&z) - self.projected[candidate];
        Bound { value: residual * residual / schur, degenerate: false }
    }
}

/// Builds the factor of `marginal[set, set]` in the order of `set`.
pub(crate) fn factor_of<T: Real>(
    marginal: ArrayView2<'_, T>,
    set: &[usize],
    block: Block,
) -> Result<IncrementalCholesky<T>> {
    let mut f = IncrementalCholesky::with_capacity(set.len());
    for &k in set {
        push_index(&mut f, marginal, k, block)?;
    }
    Ok(f)
}

/// Appends `index`, shifting its pivot by a small jitter if the Schur
/// complement is not positive.
pub(crate) fn push_index<T: Real>(
    factor: &mut IncrementalCholesky<T>,
    marginal: ArrayView2<'_, T>,
    index: usize,
    block: Block,
) -> Result<()> {
    let cross = Array1::from_iter(factor.indices().iter().map(|&k| marginal[[k, index]]));
    let diag = marginal[[index, index]];
    if factor.push(index, cross.view(), diag).is_ok() {
        return Ok(());
    }
    let count = factor.len() + 1;
    let trace = factor.indices().iter().map(|&k| marginal[[k, k]]).sum::<T>() + diag;
    let jitter = T::lit(crate::linalg::CHOLESKY_JITTER) * trace / T::from_usize_lossy(count);
    factor
        .push(index, cross.view(), diag + jitter)
        .map(|_| ())
        .map_err(|_| Error::Singular { block })
}

fn check_candidate(pattern: &SparsityPattern, sol: &CcaSolution<impl Real>, set: &[usize], dim: usize, index: usize) -> Result<()> {
    if index >= dim {
        return Err(Error::input(format!("candidate {index} out of range for dimension {dim}")));
    }
    if set.binary_search(&index).is_ok() {
        return Err(Error::input(format!("candidate {index} already selected")));
    }
    if sol.pattern != *pattern {
        return Err(Error::input("solution does not belong to the given pattern"));
    }
    Ok(())
}

/// δᵢ: lower bound on `ρ²(I ∪ {i}, J) − ρ²(I, J)` given the optimal
/// solution `sol` on `pattern`.
pub fn bound_delta<T: Real>(
    cov: &CovarianceTriple<T>,
    pattern: &SparsityPattern,
    sol: &CcaSolution<T>,
    i: usize,
) -> Result<Bound<T>> {
    pattern.check_bounds(cov.n(), cov.m())?;
    check_candidate(pattern, sol, pattern.x(), cov.n(), i)?;
    let factor = factor_of(cov.sigma_x(), pattern.x(), Block::SigmaX)?;
    let ctx = BoundContext::new(SideView::x(cov), &factor, pattern.y(), sol.b.view());
    Ok(ctx.bound(i))
}

/// γⱼ: lower bound on `ρ²(I, J ∪ {j}) − ρ²(I, J)`.
pub fn bound_gamma<T: Real>(
    cov: &CovarianceTriple<T>,
    pattern: &SparsityPattern,
    sol: &CcaSolution<T>,
    j: usize,
) -> Result<Bound<T>> {
    pattern.check_bounds(cov.n(), cov.m())?;
    check_candidate(pattern, sol, pattern.y(), cov.m(), j)?;
    let factor = factor_of(cov.sigma_y(), pattern.y(), Block::SigmaY)?;
    let ctx = BoundContext::new(SideView::y(cov), &factor, pattern.x(), sol.a.view());
    Ok(ctx.bound(j))
}
