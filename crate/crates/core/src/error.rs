use std::fmt;

/// Which covariance block an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    SigmaX,
    SigmaY,
    SigmaXy,
    Joint,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::SigmaX => "sigma_x",
            Block::SigmaY => "sigma_y",
            Block::SigmaXy => "sigma_xy",
            Block::Joint => "joint covariance",
        })
    }
}

/// Side of the problem a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    X,
    Y,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::X => "x",
            Side::Y => "y",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input (dimensions, indices, parameters).
    #[error("input error: {0}")]
    Input(String),

    /// A marginal block could not be factorized even after jitter.
    #[error("solver error: {block} is numerically singular")]
    Singular { block: Block },

    /// The covariance model violates positive semidefiniteness.
    #[error("model error: {0}")]
    Model(String),

    /// A greedy candidate failed to solve.
    #[error("candidate {side}{index} failed: {source}")]
    Candidate {
        side: Side,
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// Exhaustive search would exceed the pattern budget.
    #[error("refusing exhaustive search: {patterns} patterns exceed budget {budget}")]
    Budget { patterns: u128, budget: u128 },

    /// A Monte Carlo trial failed.
    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Csv { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for failures of the numerical solver rather than of the input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::Singular { .. } | Error::Model(_) | Error::Candidate { .. } => true,
            Error::Trial { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }

    /// True for an exhaustive-search budget refusal, possibly inside a trial.
    pub fn is_budget_refusal(&self) -> bool {
        match self {
            Error::Budget { .. } => true,
            Error::Trial { source, .. } => source.is_budget_refusal(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
