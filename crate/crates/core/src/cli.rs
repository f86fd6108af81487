//! `scca` command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 solver error, 4 exhaustive
//! search refused by the pattern budget.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiment::{self, ExperimentConfig, Method, PathMode};
use crate::greedy::{run_greedy, Direction, GreedyConfig, Mode};
use crate::io as csvio;
use crate::model::{CovarianceTriple, DataSet};
use crate::oracle::{self, OracleOptions};
use crate::random::wishart_sample;
use crate::solve_cca;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "scca", version, about = "Sparse canonical correlation analysis")]
pub struct Cli {
    /// Worker threads for candidate and trial evaluation (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full CCA on one model; prints rho and the weights.
    Solve(SolveArgs),
    /// Greedy sparsity path.
    Greedy(GreedyArgs),
    /// Exhaustive search at fixed cardinalities, or the optimal curve.
    Oracle(OracleArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

/// Where the covariance model comes from: covariance files, paired data
/// files, or a seeded Wishart draw.
#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long, value_name = "FILE", requires_all = ["cov_y", "cov_xy"])]
    pub cov_x: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub cov_y: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub cov_xy: Option<PathBuf>,

    /// Samples of x, one row per sample.
    #[arg(long, value_name = "FILE", requires = "y", conflicts_with_all = ["cov_x", "wishart"])]
    pub x: Option<PathBuf>,
    /// Samples of y, same row count as --x.
    #[arg(long, value_name = "FILE", requires = "x")]
    pub y: Option<PathBuf>,
    /// Subtract column means before estimating covariances (the default).
    #[arg(long, overrides_with = "no_center")]
    pub center: bool,
    /// Use the raw second moments of the data.
    #[arg(long)]
    pub no_center: bool,
    /// Skip one header row in every input CSV.
    #[arg(long)]
    pub header: bool,

    /// Draw the model from a normalized Wishart distribution.
    #[arg(long, conflicts_with = "cov_x", requires_all = ["n", "m"])]
    pub wishart: bool,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Wishart degrees of freedom (default n + m).
    #[arg(long)]
    pub dof: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Ridge added to the x marginal.
    #[arg(long, default_value_t = 0.0)]
    pub ridge_x: f64,
    /// Ridge added to the y marginal.
    #[arg(long, default_value_t = 0.0)]
    pub ridge_y: f64,
    /// Marginal treatment: plain CCA, PLS (identity) or DCCA (diagonal).
    #[arg(long, value_enum, default_value_t = Variant::Cca)]
    pub variant: Variant,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Variant {
    Cca,
    Pls,
    Dcca,
}

impl From<Variant> for Method {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Cca => Method::Cca,
            Variant::Pls => Method::Pls,
            Variant::Dcca => Method::Dcca,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exact,
    Approx,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Backward,
}

#[derive(Debug, Args)]
pub struct GreedyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub ka: usize,
    #[arg(long)]
    pub kb: usize,
    /// Defaults to `approx` going forward and `exact` going backward.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
    pub direction: DirectionArg,
    /// Path CSV (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-step weights CSV (default: next to --out with a `_weights` suffix).
    #[arg(long)]
    pub weights_out: Option<PathBuf>,
    /// Append solver counters to the path output as `#` lines.
    #[arg(long)]
    pub solve_counts: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, requires = "kb", conflicts_with = "curve")]
    pub ka: Option<usize>,
    #[arg(long, requires = "ka")]
    pub kb: Option<usize>,
    /// Optimal curve up to this total cardinality.
    #[arg(long, value_name = "MAX_TOTAL")]
    pub curve: Option<usize>,
    /// Maximum number of patterns per search.
    #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
    pub budget: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub weights_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Average correlation vs cardinality over random instances.
    Tradeoff(ExperimentArgs),
    /// One large forward path as a fraction of the full correlation.
    Largescale(ExperimentArgs),
    /// Small-sample study scored under the true model.
    Regularize(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Wishart degrees of freedom (default n + m).
    #[arg(long)]
    pub dof: Option<usize>,
    /// Samples per trial for `regularize`.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', value_parser = parse_mode)]
    pub modes: Vec<PathMode>,
    #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
    pub budget: u128,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> std::result::Result<PathMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn exit_code(err: &Error) -> u8 {
    if err.is_budget_refusal() {
        EXIT_BUDGET
    } else if err.is_solver_failure() {
        EXIT_SOLVER
    } else {
        EXIT_INPUT
    }
}

/// Parses `std::env::args` and runs the command.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scca: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::input("--threads must be at least 1"));
        }
        // Fails only if the pool is already initialized, e.g. in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Greedy(args) => cmd_greedy(&args),
        Command::Oracle(args) => cmd_oracle(&args),
        Command::Experiment(cmd) => cmd_experiment(&cmd),
    }
}

fn load_model(input: &InputArgs) -> Result<CovarianceTriple<f64>> {
    let cov = if let (Some(fx), Some(fy), Some(fxy)) = (&input.cov_x, &input.cov_y, &input.cov_xy) {
        CovarianceTriple::new(
            csvio::read_matrix(fx, input.header)?,
            csvio::read_matrix(fy, input.header)?,
            csvio::read_matrix(fxy, input.header)?,
        )?
    } else if let (Some(fx), Some(fy)) = (&input.x, &input.y) {
        let data = DataSet::new(csvio::read_matrix(fx, input.header)?, csvio::read_matrix(fy, input.header)?)?;
        data.estimate_covariance(!input.no_center)
    } else if input.wishart {
        let (n, m) = (input.n.unwrap_or_default(), input.m.unwrap_or_default());
        wishart_sample(input.seed, n, m, input.dof.unwrap_or(n + m))?
    } else {
        return Err(Error::input("no model given: use --cov-x/--cov-y/--cov-xy, --x/--y, or --wishart"));
    };
    let cov = cov.ridge_regularize(input.ridge_x, input.ridge_y)?;
    Ok(Method::from(input.variant).apply(&cov))
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn weights_path(explicit: Option<&PathBuf>, out: Option<&PathBuf>) -> Option<PathBuf> {
    explicit.cloned().or_else(|| {
        out.map(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            p.with_file_name(format!("{stem}_weights.csv"))
        })
    })
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let cov = load_model(&args.input)?;
    let sol = solve_cca(&cov)?;
    let mut out = open_out(args.out.as_deref())?;
    csvio::write_solution(&mut out, &sol)?;
    out.flush()?;
    Ok(())
}

fn cmd_greedy(args: &GreedyArgs) -> Result<()> {
    let cov = load_model(&args.input)?;
    let mode = match (args.mode, args.direction) {
        (Some(ModeArg::Exact), _) | (None, DirectionArg::Backward) => Mode::Exact,
        (Some(ModeArg::Approx), _) | (None, DirectionArg::Forward) => Mode::Approximate,
    };
    let direction = match args.direction {
        DirectionArg::Forward => Direction::Forward,
        DirectionArg::Backward => Direction::Backward,
    };
    let config = GreedyConfig::new(args.ka, args.kb, mode, direction).with_parallel(true);
    let path = run_greedy(&cov, &config)?;

    let mut out = open_out(args.out.as_deref())?;
    csvio::write_path(&mut out, &path)?;
    if args.solve_counts {
        csvio::write_stats(&mut out, &path.stats)?;
    }
    out.flush()?;
    if let Some(w) = weights_path(args.weights_out.as_ref(), args.out.as_ref()) {
        let mut wout = open_out(Some(&w))?;
        csvio::write_weights(&mut wout, &path)?;
        wout.flush()?;
    }
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let cov = load_model(&args.input)?;
    let options = OracleOptions { budget: args.budget, parallel: true };
    let mut out = open_out(args.out.as_deref())?;
    match (args.ka, args.kb, args.curve) {
        (Some(ka), Some(kb), _) => {
            let sol = oracle::exhaustive_sparse_cca(&cov, ka, kb, &options)?;
            csvio::write_solution(&mut out, &sol)?;
        }
        (_, _, Some(max_total)) => {
            let curve = oracle::oracle_curve(&cov, max_total, &options)?;
            csvio::write_oracle_curve(&mut out, &curve)?;
            if let Some(w) = weights_path(args.weights_out.as_ref(), args.out.as_ref()) {
                let mut wout = open_out(Some(&w))?;
                csvio::write_oracle_weights(&mut wout, &curve)?;
                wout.flush()?;
            }
        }
        _ => return Err(Error::input("oracle needs --ka and --kb, or --curve")),
    }
    out.flush()?;
    Ok(())
}

/// `dof_factor` scales the default Wishart degrees of freedom, `n + m`.
fn experiment_config(args: &ExperimentArgs, default_dim: usize, default_trials: usize, dof_factor: usize) -> ExperimentConfig {
    let n = args.n.unwrap_or(default_dim);
    let m = args.m.unwrap_or(default_dim);
    let mut config = ExperimentConfig::new(n, m);
    config.trials = args.trials.unwrap_or(default_trials);
    config.seed = args.seed;
    config.dof = args.dof.unwrap_or(dof_factor * (n + m));
    config.samples = args.samples;
    config.budget = args.budget;
    config.parallel = true;
    config
}

fn cmd_experiment(cmd: &ExperimentCommand) -> Result<()> {
    let (kind, table, config) = match cmd {
        ExperimentCommand::Tradeoff(args) => {
            let mut config = experiment_config(args, 7, 200, 1);
            config.methods = pick(&args.methods, &[Method::Cca]);
            config.modes = pick(&args.modes, &PathMode::ALL);
            ("tradeoff", experiment::sparsity_tradeoff_experiment::<f64>(&config)?, config)
        }
        ExperimentCommand::Largescale(args) => {
            let mut config = experiment_config(args, 100, 1, 2);
            config.methods = vec![Method::Cca];
            config.modes = vec![PathMode::ForwardApprox];
            ("largescale", experiment::large_scale_path::<f64>(&config)?, config)
        }
        ExperimentCommand::Regularize(args) => {
            let mut config = experiment_config(args, 10, 500, 2);
            config.methods = pick(&args.methods, &Method::ALL);
            config.modes = pick(&args.modes, &[PathMode::ForwardApprox]);
            ("regularize", experiment::regularization_experiment::<f64>(&config)?, config)
        }
    };
    let args = match cmd {
        ExperimentCommand::Tradeoff(a) | ExperimentCommand::Largescale(a) | ExperimentCommand::Regularize(a) => a,
    };
    std::fs::create_dir_all(&args.out_dir)?;
    let file = args.out_dir.join(format!("{kind}-{}.csv", config.hash(kind)));
    let mut out = open_out(Some(&file))?;
    csvio::write_curve_table(&mut out, &table)?;
    out.flush()?;

    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{}", file.display())?;
    if kind == "largescale" {
        let half = (config.n + config.m) / 2;
        if let Some(row) = table.row(Method::Cca, PathMode::ForwardApprox, half) {
            writeln!(stdout, "half_cardinality_ratio,{},{}", half, row.mean_rho)?;
        }
    }
    Ok(())
}

fn pick<T: Copy>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() {
        default.to_vec()
    } else {
        given.to_vec()
    }
}
