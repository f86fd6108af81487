use ndarray::{Array1, Array2, ArrayView1};

use crate::num::Real;

/// Cholesky factor of a principal submatrix that grows one index at a time.
///
/// Rows are stored in insertion order. Appending index `i` to a factor of
/// `S[I, I]` costs one triangular solve: the new row is `L⁻¹ S[I, i]` and
/// the new pivot is the square root of the Schur complement
/// `S[i, i] - |L⁻¹ S[I, i]|²`.
#[derive(Debug, Clone)]
pub struct IncrementalCholesky<T> {
    indices: Vec<usize>,
    factor: Array2<T>,
}

impl<T: Real> IncrementalCholesky<T> {
    pub fn with_capacity(capacity: usize) -> Self {
        Self { indices: Vec::with_capacity(capacity), factor: Array2::zeros((capacity, capacity)) }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Selected indices in insertion order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Solves `L z = rhs` against the current factor.
    pub fn solve_lower(&self, rhs: ArrayView1<'_, T>) -> Array1<T> {
        let k = self.len();
        debug_assert_eq!(rhs.len(), k);
        let mut z = rhs.to_owned();
        for i in 0..k {
            let mut s = z[i];
            for j in 0..i {
                s -= self.factor[[i, j]] * z[j];
            }
            z[i] = s / self.factor[[i, i]];
        }
        z
    }

    /// Appends `index` given its cross column `cross = S[I, index]` and
    /// diagonal `S[index, index]`. Returns the Schur complement; the
    /// factor is left unchanged when it is not safely positive (at or
    /// below `dim * eps * |diag|`).
    pub fn push(&mut self, index: usize, cross: ArrayView1<'_, T>, diag: T) -> Result<T, T> {
        let k = self.len();
        let z = self.solve_lower(cross);
        let schur = diag - z.iter().map(|&v| v * v).sum::<T>();
        let floor = T::epsilon() * T::from_usize_lossy(k + 1) * diag.abs();
        if !(schur > floor) {
            return Err(schur);
        }
        if k == self.factor.nrows() {
            self.grow();
        }
        for j in 0..k {
            self.factor[[k, j]] = z[j];
        }
        self.factor[[k, k]] = schur.sqrt();
        self.indices.push(index);
        Ok(schur)
    }

    fn grow(&mut self) {
        let cap = (self.factor.nrows() * 2).max(4);
        let mut bigger = Array2::zeros((cap, cap));
        let k = self.len();
        bigger.slice_mut(ndarray::s![..k, ..k]).assign(&self.factor.slice(ndarray::s![..k, ..k]));
        self.factor = bigger;
    }
}
