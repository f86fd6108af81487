//! Reference computations for tests. Everything here goes through
//! nalgebra or plain loops, never through the crate's own linear algebra.

#![allow(dead_code)]

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};
use sparse_cca::{Covariance, SparsityPattern};

pub fn to_na(a: ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a[[r, c]])
}

pub fn from_na(a: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(r, c)| a[(r, c)])
}

/// Symmetric inverse square root through an eigendecomposition.
pub fn inv_sqrt(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

pub fn top_singular_value(a: &DMatrix<f64>) -> f64 {
    a.clone().svd(false, false).singular_values.max()
}

/// Canonical correlation as the top singular value of Σx^{-1/2} Σxy Σy^{-1/2}.
pub fn whitened_svd_rho(cov: &Covariance) -> f64 {
    let w = inv_sqrt(&to_na(cov.sigma_x())) * to_na(cov.sigma_xy()) * inv_sqrt(&to_na(cov.sigma_y()));
    top_singular_value(&w)
}

pub fn min_eig(a: ArrayView2<'_, f64>) -> f64 {
    to_na(a).symmetric_eigen().eigenvalues.min()
}

/// Brute-force oracle over every pattern of the given cardinalities, via
/// the whitened-SVD route.
pub fn brute_force_rho(cov: &Covariance, k_a: usize, k_b: usize) -> f64 {
    let xs = subsets(cov.n(), k_a);
    let ys = subsets(cov.m(), k_b);
    let mut best = f64::NEG_INFINITY;
    for i in &xs {
        for j in &ys {
            let p = SparsityPattern::new(i.clone(), j.clone()).unwrap();
            best = best.max(whitened_svd_rho(&cov.restrict(&p).unwrap()));
        }
    }
    best
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            out.push((0..n).filter(|b| mask & (1 << b) != 0).collect());
        }
    }
    out
}

/// Random strictly positive definite triple with well-separated spectrum.
pub fn random_pd_triple(seed: u64, n: usize, m: usize) -> Covariance {
    sparse_cca::wishart_sample(seed, n, m, 3 * (n + m)).unwrap()
}
