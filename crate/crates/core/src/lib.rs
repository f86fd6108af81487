//! Sparse canonical correlation analysis.
//!
//! Exact CCA on a covariance triple, cardinality-constrained sparse CCA by
//! forward greedy selection (exact, or accelerated by closed-form lower
//! bounds on the gain in squared correlation) and backward elimination,
//! an exhaustive reference solver for small problems, and Monte Carlo
//! experiments over random Wishart instances.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.
//!
//! ```
//! use ndarray::array;
//! use sparse_cca::{solve_cca, Covariance};
//!
//! let cov = Covariance::new(
//!     ndarray::Array2::eye(2),
//!     ndarray::Array2::eye(2),
//!     array![[0.5, 0.0], [0.0, 0.3]],
//! )
//! .unwrap();
//! let sol = solve_cca(&cov).unwrap();
//! assert!((sol.rho - 0.5).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cca;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod greedy;
pub mod io;
pub mod linalg;
pub mod model;
pub mod num;
pub mod oracle;
pub mod random;

pub use cca::{correlation_of, solve_cca, solve_on_pattern, true_correlation, CcaSolution};
pub use error::{Block, Error, Result, Side};
pub use experiment::{
    large_scale_path, regularization_experiment, sparsity_tradeoff_experiment, CurveRow, CurveTable,
    ExperimentConfig, Method, PathMode,
};
pub use greedy::{
    backward_greedy, bound_delta, bound_gamma, forward_step_approx, forward_step_exact, run_greedy, seed_pair,
    trace_greedy, Direction, GreedyConfig, Mode, Move, PathEntry, PathStats, SparsityPath,
};
pub use model::{CovarianceTriple, DataSet, Marginals, SparsityPattern};
pub use num::Real;
pub use oracle::{exhaustive_sparse_cca, oracle_curve, OracleOptions};
pub use random::{wishart_sample, GaussianSampler};

/// `f64` covariance triple.
pub type Covariance = CovarianceTriple<f64>;
/// `f32` covariance triple.
pub type Covariance32 = CovarianceTriple<f32>;
pub type Solution = CcaSolution<f64>;
pub type Solution32 = CcaSolution<f32>;
pub type Path = SparsityPath<f64>;
pub type Path32 = SparsityPath<f32>;
pub type Data = DataSet<f64>;
pub type Table = CurveTable<f64>;
