//! Full (non-sparse) canonical correlation analysis on a covariance triple.
//!
//! The symmetric-definite pencil is reduced with Cholesky factors of the
//! marginals: with `Σx = Lx Lxᵀ` and `Σy = Ly Lyᵀ`, the canonical
//! correlation is the largest singular value of `Lx⁻¹ Σxy Ly⁻ᵀ` and the
//! weights are the back-transformed singular vectors, which makes them
//! unit-variance under their marginals.

use ndarray::{Array1, ArrayView1};

use crate::error::{Block, Error, Result};
use crate::linalg::{cholesky_jittered, solve_lower_matrix, solve_lower_transposed, top_singular_triple};
use crate::model::{CovarianceTriple, Marginals, SparsityPattern};
use crate::num::{tol, Real};

/// Round-off allowance around the `[0, 1]` range of a correlation.
pub const RHO_CLAMP_TOL: f64 = 1e-10;
/// Variances below `-VARIANCE_TOL` mean the model is not PSD.
pub const VARIANCE_TOL: f64 = 1e-12;
/// Entries of `a` at or below this magnitude are skipped by the sign rule.
pub const SIGN_TOL: f64 = 1e-12;

/// Canonical weights and correlation for one sparsity pattern.
///
/// `a[k]` is the weight of variable `pattern.x()[k]`, likewise for `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CcaSolution<T> {
    pub rho: T,
    pub a: Array1<T>,
    pub b: Array1<T>,
    pub pattern: SparsityPattern,
}

impl<T: Real> CcaSolution<T> {
    /// Weights as full-length vectors with zeros off the pattern.
    pub fn embedded(&self, n: usize, m: usize) -> (Array1<T>, Array1<T>) {
        let mut a = Array1::zeros(n);
        let mut b = Array1::zeros(m);
        for (&i, &w) in self.pattern.x().iter().zip(self.a.iter()) {
            a[i] = w;
        }
        for (&j, &w) in self.pattern.y().iter().zip(self.b.iter()) {
            b[j] = w;
        }
        (a, b)
    }
}

/// Solves CCA on the whole triple. The returned pattern is the full pattern.
pub fn solve_cca<T: Real>(cov: &CovarianceTriple<T>) -> Result<CcaSolution<T>> {
    let (lx, _) = cholesky_jittered(cov.sigma_x(), Block::SigmaX)?;
    let (ly, _) = cholesky_jittered(cov.sigma_y(), Block::SigmaY)?;

    // M = Lx⁻¹ Σxy Ly⁻ᵀ
    let left = solve_lower_matrix(lx.view(), cov.sigma_xy());
    let whitened = solve_lower_matrix(ly.view(), left.t()).reversed_axes();
    let top = top_singular_triple(whitened.view());

    let rho = if cov.marginals() == Marginals::Covariance {
        let limit = T::one() + tol::<T>(RHO_CLAMP_TOL);
        if !(top.sigma <= limit) {
            return Err(Error::Model(format!(
                "canonical correlation {} exceeds 1 beyond round-off",
                top.sigma
            )));
        }
        top.sigma.min(T::one())
    } else {
        top.sigma
    };

    let mut a = solve_lower_transposed(lx.view(), top.u.view());
    let mut b = solve_lower_transposed(ly.view(), top.v.view());
    let sign_tol = tol::<T>(SIGN_TOL);
    if let Some(first) = a.iter().copied().find(|w| w.abs() > sign_tol) {
        if first < T::zero() {
            a.mapv_inplace(|w| -w);
            b.mapv_inplace(|w| -w);
        }
    }

    Ok(CcaSolution { rho, a, b, pattern: SparsityPattern::full(cov.n(), cov.m()) })
}

/// Solves CCA on the sub-problem selected by `pattern`.
pub fn solve_on_pattern<T: Real>(cov: &CovarianceTriple<T>, pattern: &SparsityPattern) -> Result<CcaSolution<T>> {
    if pattern.card_x() == 0 || pattern.card_y() == 0 {
        return Err(Error::input("cannot solve CCA on a pattern with an empty side"));
    }
    let restricted = cov.restrict(pattern)?;
    let mut sol = solve_cca(&restricted)?;
    sol.pattern = pattern.clone();
    Ok(sol)
}

/// Correlation `aᵀΣxy b / (√(aᵀΣx a)·√(bᵀΣy b))` of a weight pair.
///
/// `0/0` is defined as 1; a zero numerator over a nonzero denominator is 0.
pub fn correlation_of<T: Real>(cov: &CovarianceTriple<T>, a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> Result<T> {
    if a.len() != cov.n() || b.len() != cov.m() {
        return Err(Error::input(format!(
            "weight lengths ({}, {}) do not match dimensions ({}, {})",
            a.len(),
            b.len(),
            cov.n(),
            cov.m()
        )));
    }
    let var_tol = tol::<T>(VARIANCE_TOL);
    let var = |v: T, block: Block| -> Result<T> {
        if v < -var_tol {
            Err(Error::Model(format!("negative variance {v:e} under {block}")))
        } else {
            Ok(v.max(T::zero()))
        }
    };
    let va = var(a.dot(&cov.sigma_x().dot(&a)), Block::SigmaX)?;
    let vb = var(b.dot(&cov.sigma_y().dot(&b)), Block::SigmaY)?;
    let num = a.dot(&cov.sigma_xy().dot(&b));
    let den = va.sqrt() * vb.sqrt();
    if den == T::zero() {
        if num.abs() <= var_tol {
            return Ok(T::one());
        }
        return Err(Error::Model(format!("covariance {num:e} between zero-variance combinations")));
    }
    if num == T::zero() {
        return Ok(T::zero());
    }
    Ok(num / den)
}

/// Correlation of estimated weights evaluated under the true model.
pub fn true_correlation<T: Real>(true_cov: &CovarianceTriple<T>, estimated: &CcaSolution<T>) -> Result<T> {
    estimated.pattern.check_bounds(true_cov.n(), true_cov.m())?;
    let (a, b) = estimated.embedded(true_cov.n(), true_cov.m());
    correlation_of(true_cov, a.view(), b.view())
}

/// Closed-form correlation of the single pair `(x_i, y_j)` in absolute value.
pub fn pair_correlation<T: Real>(cov: &CovarianceTriple<T>, i: usize, j: usize) -> T {
    let cross = cov.sigma_xy()[[i, j]].abs();
    let den = cov.sigma_x()[[i, i]].max(T::zero()).sqrt() * cov.sigma_y()[[j, j]].max(T::zero()).sqrt();
    if den == T::zero() {
        if cross == T::zero() {
            T::one()
        } else {
            T::zero()
        }
    } else {
        cross / den
    }
}
