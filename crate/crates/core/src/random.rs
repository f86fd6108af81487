//! Seeded random instances: Wishart covariance triples and Gaussian
//! samples from a given joint model.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::model::{CovarianceTriple, DataSet};
use crate::num::Real;

/// Generator for stream `stream` of base seed `seed`.
///
/// Streams are independent ChaCha sequences, so trial `k` draws the same
/// numbers no matter which thread runs it or in which order.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A child seed for stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    stream_rng(seed, stream).random()
}

fn standard_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Normalized Wishart draw `GᵀG / dof` split into an `(n, m)` triple.
///
/// `G` has `dof` rows of i.i.d. standard Gaussians of length `n + m`.
pub fn wishart_sample<T: Real>(seed: u64, n: usize, m: usize, dof: usize) -> Result<CovarianceTriple<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    wishart_with_rng(&mut rng, n, m, dof)
}

pub fn wishart_with_rng<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
    dof: usize,
) -> Result<CovarianceTriple<T>> {
    let dim = n + m;
    if n == 0 || m == 0 {
        return Err(Error::input("Wishart dimensions must be positive"));
    }
    if dof < dim {
        return Err(Error::input(format!(
            "Wishart degrees of freedom {dof} below dimension {dim}; the draw would be singular"
        )));
    }
    let g = Array2::from_shape_simple_fn((dof, dim), || standard_normal::<T, _>(rng));
    let scale = T::from_usize_lossy(dof);
    let mut w = g.t().dot(&g).mapv(|v| v / scale);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = w[[i, j]];
            w[[j, i]] = v;
        }
    }
    CovarianceTriple::from_joint(w.view(), n)
}

/// Draws zero-mean Gaussian vectors `(x, y)` with a prescribed joint covariance.
///
/// The factor is `V·diag(√max(λ, 0))` from the eigendecomposition of the
/// joint matrix, so slightly indefinite inputs are accepted.
#[derive(Debug, Clone)]
pub struct GaussianSampler<T> {
    factor: Array2<T>,
    n: usize,
}

impl<T: Real> GaussianSampler<T> {
    pub fn new(cov: &CovarianceTriple<T>) -> Self {
        let (values, vectors) = symmetric_eigen(cov.joint().view());
        let roots = values.mapv(|l| l.max(T::zero()).sqrt());
        let factor = &vectors * &roots.insert_axis(ndarray::Axis(0));
        Self { factor, n: cov.n() }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> DataSet<T> {
        let dim = self.factor.nrows();
        let z = Array2::from_shape_simple_fn((count, dim), || standard_normal::<T, _>(rng));
        let joint = z.dot(&self.factor.t());
        let x = joint.slice(ndarray::s![.., ..self.n]).to_owned();
        let y = joint.slice(ndarray::s![.., self.n..]).to_owned();
        DataSet::new(x, y).expect("sampler dimensions are consistent")
    }

    /// One joint draw, for callers that want a single vector.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Array1<T> {
        let dim = self.factor.nrows();
        let z = Array1::from_shape_simple_fn(dim, || standard_normal::<T, _>(rng));
        self.factor.dot(&z)
    }
}
