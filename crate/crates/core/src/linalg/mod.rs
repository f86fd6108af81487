//! Dense kernels used by the CCA solver: Cholesky factorization with a
//! bounded jitter retry, triangular solves, a cyclic Jacobi symmetric
//! eigensolver and a one-sided Jacobi SVD.

mod incremental;

pub use incremental::IncrementalCholesky;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Block, Error, Result};
use crate::num::Real;

const MAX_JACOBI_SWEEPS: usize = 80;

/// Relative jitter added to the diagonal when a first factorization fails.
pub const CHOLESKY_JITTER: f64 = 1e-10;

/// Lower Cholesky factor of a symmetric matrix.
///
/// Returns `None` when a pivot is not safely positive, i.e. at or below
/// `dim * eps * max_diag`.
pub fn cholesky<T: Real>(a: ArrayView2<'_, T>) -> Option<Array2<T>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let max_diag = a.diag().iter().fold(T::zero(), |acc, &d| acc.max(d.abs()));
    let floor = T::epsilon() * T::from_usize_lossy(n.max(1)) * max_diag;
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > floor) || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / ljj;
        }
    }
    Some(l)
}

/// Cholesky factor with one deterministic retry.
///
/// On failure the diagonal is shifted by `1e-10 * trace / dim` and the
/// factorization attempted once more. Returns the factor together with
/// the jitter that was applied (zero on first-try success).
pub fn cholesky_jittered<T: Real>(a: ArrayView2<'_, T>, block: Block) -> Result<(Array2<T>, T)> {
    if let Some(l) = cholesky(a) {
        return Ok((l, T::zero()));
    }
    let n = a.nrows();
    if n == 0 {
        return Err(Error::Singular { block });
    }
    let trace: T = a.diag().iter().copied().sum();
    let jitter = T::lit(CHOLESKY_JITTER) * trace / T::from_usize_lossy(n);
    if !(jitter > T::zero()) {
        return Err(Error::Singular { block });
    }
    let mut shifted = a.to_owned();
    shifted.diag_mut().mapv_inplace(|d| d + jitter);
    cholesky(shifted.view())
        .map(|l| (l, jitter))
        .ok_or(Error::Singular { block })
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn solve_lower<T: Real>(l: ArrayView2<'_, T>, b: ArrayView1<'_, T>) -> Array1<T> {
    let n = l.nrows();
    let mut x = b.to_owned();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[[i, k]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solves `Lᵀ x = b` for lower-triangular `L`.
pub fn solve_lower_transposed<T: Real>(l: ArrayView2<'_, T>, b: ArrayView1<'_, T>) -> Array1<T> {
    let n = l.nrows();
    let mut x = b.to_owned();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solves `L X = B` column by column.
pub fn solve_lower_matrix<T: Real>(l: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> Array2<T> {
    let mut out = Array2::<T>::zeros(b.raw_dim());
    for (j, col) in b.axis_iter(Axis(1)).enumerate() {
        out.column_mut(j).assign(&solve_lower(l, col));
    }
    out
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in ascending order; eigenvector `k` is column
/// `k` of the returned matrix.
pub fn symmetric_eigen<T: Real>(a: ArrayView2<'_, T>) -> (Array1<T>, Array2<T>) {
    let n = a.nrows();
    let mut m = a.to_owned();
    let mut v = Array2::<T>::eye(n);
    let two = T::lit(2.0);

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = T::zero();
        let mut scale = T::zero();
        for i in 0..n {
            scale += m[[i, i]] * m[[i, i]];
            for j in (i + 1)..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        if off <= T::epsilon() * T::epsilon() * scale.max(T::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).unwrap_or(std::cmp::Ordering::Equal));
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vectors = Array2::<T>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue<T: Real>(a: ArrayView2<'_, T>) -> T {
    let (values, _) = symmetric_eigen(a);
    values.first().copied().unwrap_or(T::zero())
}

/// Leading singular triple `(sigma, u, v)` with `A v = sigma u`.
#[derive(Debug, Clone)]
pub struct SingularTriple<T> {
    pub sigma: T,
    pub u: Array1<T>,
    pub v: Array1<T>,
}

/// Largest singular value and vectors via one-sided (Hestenes) Jacobi.
///
/// When the matrix is zero the first canonical basis vectors are returned.
pub fn top_singular_triple<T: Real>(a: ArrayView2<'_, T>) -> SingularTriple<T> {
    let (p, q) = a.dim();
    if p < q {
        let t = top_singular_triple(a.t());
        return SingularTriple { sigma: t.sigma, u: t.v, v: t.u };
    }
    let mut w = a.to_owned();
    let mut v = Array2::<T>::eye(q);
    let two = T::lit(2.0);
    let eps = T::epsilon();

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for j in 0..q {
            for k in (j + 1)..q {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for r in 0..p {
                    let x = w[[r, j]];
                    let y = w[[r, k]];
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (two * gamma);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for r in 0..p {
                    let x = w[[r, j]];
                    let y = w[[r, k]];
                    w[[r, j]] = c * x - s * y;
                    w[[r, k]] = s * x + c * y;
                }
                for r in 0..q {
                    let x = v[[r, j]];
                    let y = v[[r, k]];
                    v[[r, j]] = c * x - s * y;
                    v[[r, k]] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut best = 0;
    let mut best_norm = T::neg_infinity();
    for j in 0..q {
        let norm = w.column(j).iter().map(|&x| x * x).sum::<T>().sqrt();
        if norm > best_norm {
            best_norm = norm;
            best = j;
        }
    }
    if q == 0 {
        return SingularTriple { sigma: T::zero(), u: Array1::zeros(p), v: Array1::zeros(0) };
    }
    let sigma = best_norm;
    let (u, right) = if sigma > T::zero() {
        (w.column(best).mapv(|x| x / sigma), v.column(best).to_owned())
    } else {
        let mut u = Array1::zeros(p);
        let mut right = Array1::zeros(q);
        u[0] = T::one();
        right[0] = T::one();
        (u, right)
    };
    SingularTriple { sigma, u, v: right }
}
