use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure classes, mapped onto process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Numerical,
    Resource,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Numerical => 3,
            ErrorCategory::Resource => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Numerical => "numerical",
            ErrorCategory::Resource => "resource",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Fock dimension {0}: n_cut must be at least 2")]
    InvalidDimension(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error(
        "Liouvillian of dimension {dim}x{dim} exceeds the memory guard (n_cut <= {limit}); \
         use time evolution instead"
    )]
    ResourceGuard { dim: usize, limit: usize },

    #[error("sweep has {points} points, budget is {budget}")]
    BudgetExceeded { points: usize, budget: usize },

    #[error("integration diverged at t = {time} with dt = {dt}; reduce dt")]
    Divergence { dt: f64, time: f64 },

    #[error("trace drifted to {trace} at t = {time} (tolerance 1e-6)")]
    TraceDrift { trace: f64, time: f64 },

    #[error("population {tail_mass:.3e} in the top Fock levels exceeds {tail_tol:.1e} at t = {time}; increase n_cut")]
    CutoffTooSmall {
        tail_mass: f64,
        tail_tol: f64,
        time: f64,
    },

    #[error("steady state is degenerate or ill-conditioned (pivot ratio {pivot_ratio:.3e})")]
    DegenerateSteadyState { pivot_ratio: f64 },

    #[error(
        "Wigner normalization {integral} is off by more than 1e-3; grid too small, \
         try x in [{:.3}, {:.3}], p in [{:.3}, {:.3}]",
        suggested[0], suggested[1], suggested[2], suggested[3]
    )]
    GridTooSmall { integral: f64, suggested: [f64; 4] },

    #[error("closed form not applicable: {0}")]
    NotApplicable(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            InvalidDimension(_)
            | InvalidParameter { .. }
            | DimensionMismatch { .. }
            | InvalidState(_)
            | NotApplicable(_)
            | Io { .. }
            | Parse { .. } => ErrorCategory::Config,
            ResourceGuard { .. } | BudgetExceeded { .. } => ErrorCategory::Resource,
            Divergence { .. }
            | TraceDrift { .. }
            | CutoffTooSmall { .. }
            | DegenerateSteadyState { .. }
            | GridTooSmall { .. } => ErrorCategory::Numerical,
        }
    }

    /// Short stable identifier written into sweep rows.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidDimension(_) => "invalid-dimension",
            InvalidParameter { .. } => "invalid-parameter",
            DimensionMismatch { .. } => "dimension-mismatch",
            InvalidState(_) => "invalid-state",
            ResourceGuard { .. } => "resource-guard",
            BudgetExceeded { .. } => "budget-exceeded",
            Divergence { .. } => "divergence",
            TraceDrift { .. } => "trace-drift",
            CutoffTooSmall { .. } => "cutoff-too-small",
            DegenerateSteadyState { .. } => "degenerate-steady-state",
            GridTooSmall { .. } => "grid-too-small",
            NotApplicable(_) => "not-applicable",
            Io { .. } => "io",
            Parse { .. } => "parse",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
