//! Covariance model: the joint second-order triple, paired sample data,
//! sparsity patterns and the marginal transforms (ridge, diagonal,
//! identity) applied before solving.

use ndarray::{s, Array2, ArrayView2, Axis};

use crate::error::{Block, Error, Result};
use crate::linalg::min_eigenvalue;
use crate::num::{tol, Real};

/// Relative tolerance on the symmetry of the marginal blocks.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Minimum joint eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;

/// What the marginal blocks of a triple stand for.
///
/// Only genuine covariance marginals bound the canonical correlation by 1;
/// the diagonal and identity substitutes (DCCA, PLS) generally do not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Marginals {
    Covariance,
    Diagonal,
    Identity,
}

/// The joint second-order model `(Σx, Σy, Σxy)` of two zero-mean vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceTriple<T> {
    sigma_x: Array2<T>,
    sigma_y: Array2<T>,
    sigma_xy: Array2<T>,
    marginals: Marginals,
}

impl<T: Real> CovarianceTriple<T> {
    /// Builds a triple, checking dimensions and marginal symmetry.
    ///
    /// Positive semidefiniteness is not checked here; see [`Self::validate_psd`].
    pub fn new(sigma_x: Array2<T>, sigma_y: Array2<T>, sigma_xy: Array2<T>) -> Result<Self> {
        let n = sigma_x.nrows();
        let m = sigma_y.nrows();
        if n == 0 || m == 0 {
            return Err(Error::input("covariance blocks must be non-empty"));
        }
        if sigma_x.ncols() != n {
            return Err(Error::input(format!("sigma_x is {}x{}, expected square", n, sigma_x.ncols())));
        }
        if sigma_y.ncols() != m {
            return Err(Error::input(format!("sigma_y is {}x{}, expected square", m, sigma_y.ncols())));
        }
        if sigma_xy.dim() != (n, m) {
            let (r, c) = sigma_xy.dim();
            return Err(Error::input(format!("sigma_xy is {r}x{c}, expected {n}x{m}")));
        }
        check_symmetric(sigma_x.view(), Block::SigmaX)?;
        check_symmetric(sigma_y.view(), Block::SigmaY)?;
        Ok(Self { sigma_x, sigma_y, sigma_xy, marginals: Marginals::Covariance })
    }

    /// Splits a symmetric `(n + m)`-square joint matrix into its blocks.
    pub fn from_joint(joint: ArrayView2<'_, T>, n: usize) -> Result<Self> {
        let dim = joint.nrows();
        if joint.ncols() != dim || n == 0 || n >= dim {
            return Err(Error::input(format!("cannot split a {}x{} matrix at {n}", dim, joint.ncols())));
        }
        Self::new(
            joint.slice(s![..n, ..n]).to_owned(),
            joint.slice(s![n.., n..]).to_owned(),
            joint.slice(s![..n, n..]).to_owned(),
        )
    }

    pub fn sigma_x(&self) -> ArrayView2<'_, T> {
        self.sigma_x.view()
    }

    pub fn sigma_y(&self) -> ArrayView2<'_, T> {
        self.sigma_y.view()
    }

    pub fn sigma_xy(&self) -> ArrayView2<'_, T> {
        self.sigma_xy.view()
    }

    /// Dimension of `x`.
    pub fn n(&self) -> usize {
        self.sigma_x.nrows()
    }

    /// Dimension of `y`.
    pub fn m(&self) -> usize {
        self.sigma_y.nrows()
    }

    /// The stacked matrix `[[Σx, Σxy], [Σxyᵀ, Σy]]`.
    pub fn joint(&self) -> Array2<T> {
        let (n, m) = (self.n(), self.m());
        let mut j = Array2::zeros((n + m, n + m));
        j.slice_mut(s![..n, ..n]).assign(&self.sigma_x);
        j.slice_mut(s![n.., n..]).assign(&self.sigma_y);
        j.slice_mut(s![..n, n..]).assign(&self.sigma_xy);
        j.slice_mut(s![n.., ..n]).assign(&self.sigma_xy.t());
        j
    }

    /// Checks that the joint matrix is PSD up to round-off and returns
    /// its smallest eigenvalue.
    pub fn validate_psd(&self) -> Result<T> {
        let joint = self.joint();
        let scale = joint.diag().iter().fold(T::one(), |acc, &d| acc.max(d.abs()));
        let lambda = min_eigenvalue(joint.view());
        if lambda < -tol::<T>(PSD_TOL) * scale {
            return Err(Error::Model(format!(
                "joint covariance has eigenvalue {:e} below -{:e}",
                lambda, PSD_TOL
            )));
        }
        Ok(lambda)
    }

    pub fn marginals(&self) -> Marginals {
        self.marginals
    }

    /// Exchanges the roles of `x` and `y`.
    pub fn swapped(&self) -> Self {
        Self {
            sigma_x: self.sigma_y.clone(),
            sigma_y: self.sigma_x.clone(),
            sigma_xy: self.sigma_xy.t().to_owned(),
            marginals: self.marginals,
        }
    }

    /// Adds `eps_x·I` to `Σx` and `eps_y·I` to `Σy`.
    pub fn ridge_regularize(&self, eps_x: T, eps_y: T) -> Result<Self> {
        if !(eps_x >= T::zero()) || !(eps_y >= T::zero()) {
            return Err(Error::input(format!("ridge parameters must be nonnegative, got {eps_x}, {eps_y}")));
        }
        let mut out = self.clone();
        out.sigma_x.diag_mut().mapv_inplace(|d| d + eps_x);
        out.sigma_y.diag_mut().mapv_inplace(|d| d + eps_y);
        Ok(out)
    }

    /// Zeroes the off-diagonal entries of both marginals (diagonal CCA).
    pub fn diagonalize_marginals(&self) -> Self {
        let diag = |a: &Array2<T>| Array2::from_diag(&a.diag());
        Self {
            sigma_x: diag(&self.sigma_x),
            sigma_y: diag(&self.sigma_y),
            sigma_xy: self.sigma_xy.clone(),
            marginals: Marginals::Diagonal,
        }
    }

    /// Replaces both marginals by the identity; solving the result is PLS.
    pub fn identity_marginals(&self) -> Self {
        Self {
            sigma_x: Array2::eye(self.n()),
            sigma_y: Array2::eye(self.m()),
            sigma_xy: self.sigma_xy.clone(),
            marginals: Marginals::Identity,
        }
    }

    /// Submatrices `(Σx[I, I], Σy[J, J], Σxy[I, J])` in pattern order.
    pub fn restrict(&self, pattern: &SparsityPattern) -> Result<Self> {
        pattern.check_bounds(self.n(), self.m())?;
        let (ix, jy) = (pattern.x(), pattern.y());
        Ok(Self {
            sigma_x: self.sigma_x.select(Axis(0), ix).select(Axis(1), ix),
            sigma_y: self.sigma_y.select(Axis(0), jy).select(Axis(1), jy),
            sigma_xy: self.sigma_xy.select(Axis(0), ix).select(Axis(1), jy),
            marginals: self.marginals,
        })
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U + Copy) -> CovarianceTriple<U> {
        CovarianceTriple {
            sigma_x: self.sigma_x.mapv(f),
            sigma_y: self.sigma_y.mapv(f),
            sigma_xy: self.sigma_xy.mapv(f),
            marginals: self.marginals,
        }
    }
}

fn check_symmetric<T: Real>(a: ArrayView2<'_, T>, block: Block) -> Result<()> {
    let scale = a.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    let limit = tol::<T>(SYMMETRY_TOL) * scale;
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[[i, j]] - a[[j, i]]).abs() > limit || !a[[i, j]].is_finite() {
                return Err(Error::input(format!("{block} is not symmetric at ({i}, {j})")));
            }
        }
    }
    if a.diag().iter().any(|d| !d.is_finite()) {
        return Err(Error::input(format!("{block} has a non-finite diagonal")));
    }
    Ok(())
}

/// `N` paired observations; row `k` of `x` and of `y` form sample `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet<T> {
    x: Array2<T>,
    y: Array2<T>,
}

impl<T: Real> DataSet<T> {
    pub fn new(x: Array2<T>, y: Array2<T>) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::input(format!(
                "x has {} samples but y has {}",
                x.nrows(),
                y.nrows()
            )));
        }
        if x.nrows() == 0 {
            return Err(Error::input("data set has no samples"));
        }
        if x.ncols() == 0 || y.ncols() == 0 {
            return Err(Error::input("data set has no variables"));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> ArrayView2<'_, T> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView2<'_, T> {
        self.y.view()
    }

    pub fn samples(&self) -> usize {
        self.x.nrows()
    }

    /// Sample covariance `(XᵀX, YᵀY, XᵀY) / N`, optionally after
    /// subtracting column means.
    pub fn estimate_covariance(&self, center: bool) -> CovarianceTriple<T> {
        let count = T::from_usize_lossy(self.samples());
        let (x, y) = if center {
            (centered(&self.x), centered(&self.y))
        } else {
            (self.x.clone(), self.y.clone())
        };
        let scale = |g: Array2<T>| g.mapv(|v| v / count);
        let sigma_x = symmetrize(scale(x.t().dot(&x)));
        let sigma_y = symmetrize(scale(y.t().dot(&y)));
        let sigma_xy = scale(x.t().dot(&y));
        CovarianceTriple { sigma_x, sigma_y, sigma_xy, marginals: Marginals::Covariance }
    }
}

fn centered<T: Real>(a: &Array2<T>) -> Array2<T> {
    let count = T::from_usize_lossy(a.nrows());
    let means = a.sum_axis(Axis(0)).mapv(|s| s / count);
    a - &means
}

fn symmetrize<T: Real>(mut a: Array2<T>) -> Array2<T> {
    let n = a.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (a[[i, j]] + a[[j, i]]) * half;
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
    a
}

/// Selected variable sets `I` (over `x`) and `J` (over `y`), each a
/// strictly increasing index list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparsityPattern {
    pub(crate) x: Vec<usize>,
    pub(crate) y: Vec<usize>,
}

impl SparsityPattern {
    /// Builds a pattern from strictly increasing index lists.
    pub fn new(x: Vec<usize>, y: Vec<usize>) -> Result<Self> {
        for (name, idx) in [("I", &x), ("J", &y)] {
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::input(format!("index set {name} is not strictly increasing: {idx:?}")));
            }
        }
        Ok(Self { x, y })
    }

    /// Builds a pattern from arbitrary-order index lists, rejecting duplicates.
    pub fn from_unsorted(mut x: Vec<usize>, mut y: Vec<usize>) -> Result<Self> {
        x.sort_unstable();
        y.sort_unstable();
        Self::new(x, y)
    }

    pub fn full(n: usize, m: usize) -> Self {
        Self { x: (0..n).collect(), y: (0..m).collect() }
    }

    pub fn x(&self) -> &[usize] {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn card_x(&self) -> usize {
        self.x.len()
    }

    pub fn card_y(&self) -> usize {
        self.y.len()
    }

    pub fn total(&self) -> usize {
        self.x.len() + self.y.len()
    }

    pub fn contains(&self, side: crate::Side, index: usize) -> bool {
        match side {
            crate::Side::X => self.x.binary_search(&index).is_ok(),
            crate::Side::Y => self.y.binary_search(&index).is_ok(),
        }
    }

    /// True when both index sets contain the corresponding sets of `other`.
    pub fn contains_pattern(&self, other: &SparsityPattern) -> bool {
        other.x.iter().all(|i| self.x.binary_search(i).is_ok())
            && other.y.iter().all(|j| self.y.binary_search(j).is_ok())
    }

    /// The pattern with `index` inserted on `side`.
    pub fn with(&self, side: crate::Side, index: usize) -> Self {
        let mut out = self.clone();
        let set = match side {
            crate::Side::X => &mut out.x,
            crate::Side::Y => &mut out.y,
        };
        if let Err(pos) = set.binary_search(&index) {
            set.insert(pos, index);
        }
        out
    }

    /// The pattern with `index` removed from `side`.
    pub fn without(&self, side: crate::Side, index: usize) -> Self {
        let mut out = self.clone();
        let set = match side {
            crate::Side::X => &mut out.x,
            crate::Side::Y => &mut out.y,
        };
        set.retain(|&k| k != index);
        out
    }

    /// Maps a pattern expressed in the coordinates of `self` back to the
    /// original coordinates (`restrict(restrict(c, self), inner) ==
    /// restrict(c, self.compose(inner))`).
    pub fn compose(&self, inner: &SparsityPattern) -> Result<Self> {
        inner.check_bounds(self.x.len(), self.y.len())?;
        Ok(Self {
            x: inner.x.iter().map(|&k| self.x[k]).collect(),
            y: inner.y.iter().map(|&k| self.y[k]).collect(),
        })
    }

    pub(crate) fn check_bounds(&self, n: usize, m: usize) -> Result<()> {
        if let Some(&i) = self.x.iter().find(|&&i| i >= n) {
            return Err(Error::input(format!("x index {i} out of range for n = {n}")));
        }
        if let Some(&j) = self.y.iter().find(|&&j| j >= m) {
            return Err(Error::input(format!("y index {j} out of range for m = {m}")));
        }
        Ok(())
    }
}
