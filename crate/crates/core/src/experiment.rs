//! Monte Carlo experiments: correlation-vs-cardinality curves averaged
//! over random Wishart instances, a single large forward path reported as
//! a fraction of the full correlation, and the small-sample
//! regularization study scored by the correlation the estimated weights
//! achieve under the true model.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::cca::{solve_cca, true_correlation, CcaSolution};
use crate::error::{Error, Result};
use crate::greedy::{trace_greedy, GreedyConfig, Mode};
use crate::model::CovarianceTriple;
use crate::num::Real;
use crate::oracle::{oracle_curve, OracleOptions};
use crate::random::{derive_seed, stream_rng, wishart_sample, GaussianSampler};

/// How the marginal covariances are treated before solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Plain CCA on the (estimated) triple.
    Cca,
    /// Marginals replaced by the identity.
    Pls,
    /// Marginals replaced by their diagonals.
    Dcca,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Cca, Method::Pls, Method::Dcca];

    pub fn apply<T: Real>(self, cov: &CovarianceTriple<T>) -> CovarianceTriple<T> {
        match self {
            Method::Cca => cov.clone(),
            Method::Pls => cov.identity_marginals(),
            Method::Dcca => cov.diagonalize_marginals(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Cca => "cca",
            Method::Pls => "pls",
            Method::Dcca => "dcca",
        }
    }
}

/// Search strategy producing one curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathMode {
    ForwardApprox,
    ForwardExact,
    Backward,
    Oracle,
}

impl PathMode {
    pub const ALL: [PathMode; 4] = [PathMode::ForwardApprox, PathMode::ForwardExact, PathMode::Backward, PathMode::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            PathMode::ForwardApprox => "forward-approx",
            PathMode::ForwardExact => "forward-exact",
            PathMode::Backward => "backward",
            PathMode::Oracle => "oracle",
        }
    }
}

macro_rules! named_enum {
    ($ty:ty) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                <$ty>::ALL
                    .into_iter()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| Error::input(format!("unknown {}: {s}", stringify!($ty))))
            }
        }
    };
}

named_enum!(Method);
named_enum!(PathMode);

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    /// Wishart degrees of freedom.
    pub dof: usize,
    /// Samples per trial (regularization study).
    pub samples: usize,
    pub methods: Vec<Method>,
    pub modes: Vec<PathMode>,
    /// Pattern budget for oracle curves.
    pub budget: u128,
    pub parallel: bool,
}

impl ExperimentConfig {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            trials: 1,
            seed: 0,
            dof: n + m,
            samples: 2 * (n + m),
            methods: vec![Method::Cca],
            modes: vec![PathMode::ForwardApprox],
            budget: crate::oracle::DEFAULT_BUDGET,
            parallel: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::input("dimensions must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::input("trials must be at least 1"));
        }
        if self.methods.is_empty() || self.modes.is_empty() {
            return Err(Error::input("method and mode lists must be non-empty"));
        }
        if self.dof < self.n + self.m {
            return Err(Error::input(format!("dof {} below dimension {}", self.dof, self.n + self.m)));
        }
        Ok(())
    }

    /// Canonical text form; equal configs give equal strings.
    pub fn fingerprint(&self, kind: &str) -> String {
        let join = |v: Vec<&str>| v.join("+");
        format!(
            "{kind};n={};m={};trials={};seed={};dof={};samples={};methods={};modes={};budget={}",
            self.n,
            self.m,
            self.trials,
            self.seed,
            self.dof,
            self.samples,
            join(self.methods.iter().map(|m| m.name()).collect()),
            join(self.modes.iter().map(|m| m.name()).collect()),
            self.budget,
        )
    }

    /// Short hex digest of [`Self::fingerprint`], used in output file names.
    pub fn hash(&self, kind: &str) -> String {
        let digest = Sha256::digest(self.fingerprint(kind).as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow<T> {
    pub total_cardinality: usize,
    pub method: Method,
    pub mode: PathMode,
    pub mean_rho: T,
    pub std_rho: T,
    /// Trials contributing to this cell.
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable<T> {
    pub rows: Vec<CurveRow<T>>,
}

impl<T: Real> CurveTable<T> {
    pub fn row(&self, method: Method, mode: PathMode, total: usize) -> Option<&CurveRow<T>> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.mode == mode && r.total_cardinality == total)
    }

    /// Rows of one curve, ordered by cardinality.
    pub fn curve(&self, method: Method, mode: PathMode) -> Vec<&CurveRow<T>> {
        self.rows.iter().filter(|r| r.method == method && r.mode == mode).collect()
    }
}

/// Per-curve values in trial order, keyed by total cardinality.
type Cells<T> = BTreeMap<(Method, PathMode), BTreeMap<usize, Vec<T>>>;

/// One trial's curves as `(total_cardinality, value)` points.
type TrialCurves<T> = Vec<((Method, PathMode), Vec<(usize, T)>)>;

fn summarize<T: Real>(cells: Cells<T>) -> CurveTable<T> {
    let mut rows = Vec::new();
    for ((method, mode), curve) in cells {
        for (total, values) in curve {
            let count = values.len();
            if count == 0 {
                continue;
            }
            let k = T::from_usize_lossy(count);
            let mean = values.iter().fold(T::zero(), |acc, &v| acc + v) / k;
            let std = if count > 1 {
                let ss = values.iter().fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean));
                (ss / T::from_usize_lossy(count - 1)).sqrt()
            } else {
                T::zero()
            };
            rows.push(CurveRow { total_cardinality: total, method, mode, mean_rho: mean, std_rho: std, trials: count });
        }
    }
    CurveTable { rows }
}

/// Solutions along one curve, keyed by total cardinality, plus the error
/// that cut it short, if any.
fn curve_solutions<T: Real>(
    cov: &CovarianceTriple<T>,
    mode: PathMode,
    config: &ExperimentConfig,
) -> (Vec<(usize, CcaSolution<T>)>, Option<Error>) {
    let (n, m) = (cov.n(), cov.m());
    let greedy = match mode {
        PathMode::ForwardApprox => GreedyConfig::forward(n, m, Mode::Approximate),
        PathMode::ForwardExact => GreedyConfig::forward(n, m, Mode::Exact),
        PathMode::Backward => GreedyConfig::backward(1, 1),
        PathMode::Oracle => {
            let options = OracleOptions { budget: config.budget, parallel: false };
            return match oracle_curve(cov, n + m, &options) {
                Ok(points) => (points.into_iter().map(|p| (p.total(), p.solution)).collect(), None),
                Err(e) => (Vec::new(), Some(e)),
            };
        }
    };
    let (path, err) = trace_greedy(cov, &greedy);
    let points = path.entries.into_iter().map(|e| (e.pattern.total(), e.solution)).collect();
    (points, err)
}

fn run_trials<R: Send>(config: &ExperimentConfig, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    if config.parallel {
        (0..config.trials).into_par_iter().map(f).collect()
    } else {
        (0..config.trials).map(f).collect()
    }
}

/// Average correlation per total cardinality over `trials` Wishart draws.
///
/// Trial `k` uses the instance seeded by stream `k` of `config.seed`.
/// Any failing trial aborts the experiment.
pub fn sparsity_tradeoff_experiment<T: Real>(config: &ExperimentConfig) -> Result<CurveTable<T>> {
    config.validate()?;
    let per_trial = run_trials(config, |trial| -> Result<TrialCurves<T>> {
        let wrap = |e: Error| Error::Trial { trial, source: Box::new(e) };
        let cov = wishart_sample::<T>(derive_seed(config.seed, trial as u64), config.n, config.m, config.dof)
            .map_err(wrap)?;
        let mut out = Vec::new();
        for &method in &config.methods {
            let transformed = method.apply(&cov);
            for &mode in &config.modes {
                let (points, err) = curve_solutions(&transformed, mode, config);
                if let Some(e) = err {
                    return Err(wrap(e));
                }
                out.push(((method, mode), points.into_iter().map(|(t, s)| (t, s.rho)).collect()));
            }
        }
        Ok(out)
    });

    let mut cells: Cells<T> = BTreeMap::new();
    for trial in per_trial {
        for (key, points) in trial? {
            let curve = cells.entry(key).or_default();
            for (t, rho) in points {
                curve.entry(t).or_default().push(rho);
            }
        }
    }
    Ok(summarize(cells))
}

/// Forward-approximate path on one Wishart instance, reported as
/// `rho / rho_full` per total cardinality in the `mean_rho` column.
pub fn large_scale_path<T: Real>(config: &ExperimentConfig) -> Result<CurveTable<T>> {
    config.validate()?;
    let cov = wishart_sample::<T>(config.seed, config.n, config.m, config.dof)?;
    let full = solve_cca(&cov)?.rho;
    let greedy = GreedyConfig::forward(config.n, config.m, Mode::Approximate).with_parallel(config.parallel);
    let (path, err) = trace_greedy(&cov, &greedy);
    if let Some(e) = err {
        return Err(e);
    }
    let rows = path
        .entries
        .iter()
        .map(|e| CurveRow {
            total_cardinality: e.pattern.total(),
            method: Method::Cca,
            mode: PathMode::ForwardApprox,
            mean_rho: if full > T::zero() { e.rho() / full } else { T::one() },
            std_rho: T::zero(),
            trials: 1,
        })
        .collect();
    Ok(CurveTable { rows })
}

/// Small-sample study: one true triple, `trials` sample estimates of
/// `samples` draws each, greedy paths on each estimate scored by
/// [`true_correlation`] under the true triple.
///
/// A trial whose path fails part-way contributes only its successful
/// prefix; per-cell trial counts record how many trials reached it.
pub fn regularization_experiment<T: Real>(config: &ExperimentConfig) -> Result<CurveTable<T>> {
    config.validate()?;
    if config.samples < 2 {
        return Err(Error::input("regularization study needs at least 2 samples"));
    }
    let truth = wishart_sample::<T>(config.seed, config.n, config.m, config.dof)?;
    let sampler = GaussianSampler::new(&truth);

    let per_trial = run_trials(config, |trial| {
        let mut rng = stream_rng(config.seed, trial as u64 + 1);
        let estimate = sampler.sample(&mut rng, config.samples).estimate_covariance(false);
        let mut out = Vec::new();
        for &method in &config.methods {
            let transformed = method.apply(&estimate);
            for &mode in &config.modes {
                let (points, _) = curve_solutions(&transformed, mode, config);
                let scored: Vec<(usize, T)> = points
                    .into_iter()
                    .map_while(|(t, s)| true_correlation(&truth, &s).ok().map(|r| (t, r)))
                    .collect();
                out.push(((method, mode), scored));
            }
        }
        out
    });

    let mut cells: Cells<T> = BTreeMap::new();
    for &method in &config.methods {
        for &mode in &config.modes {
            cells.entry((method, mode)).or_default();
        }
    }
    for trial in per_trial {
        for (key, points) in trial {
            let curve = cells.entry(key).or_default();
            for (t, rho) in points {
                curve.entry(t).or_default().push(rho);
            }
        }
    }
    Ok(summarize(cells))
}
