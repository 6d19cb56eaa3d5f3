use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("steady state not found after {iterations} iterations (best scaled residual {residual:e})")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("regression mode {index} is not decaying (eigenvalue {eigenvalue}); spectrum undefined")]
    UnstableMode { index: usize, eigenvalue: Complex64 },

    #[error("singular resolvent at nu = {nu}")]
    SingularResolvent { nu: f64 },

    #[error("half maximum not bracketed on the {side} side of the peak; use a wider frequency grid")]
    NotBracketed { side: &'static str },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("superoperator dimension {dim} exceeds the guard {limit}")]
    DimensionGuard { dim: usize, limit: usize },

    #[error("steady state of the master equation is not unique (null space dimension at least {dim})")]
    DegenerateNullSpace { dim: usize },

    #[error("density matrix invariant violated: {0}")]
    DensityMatrix(String),

    #[error("sweep failed: all {points} points failed to converge")]
    SweepFailed { points: usize },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Parameter { .. } | Error::Geometry(_) => 1,
            Error::Io { .. } => 3,
            _ => 2,
        }
    }

    /// Short machine-readable tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Geometry(_) => "geometry",
            Error::Dimension { .. } => "dimension",
            Error::Parameter { .. } => "parameter",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Numerical(_) => "numerical",
            Error::UnstableMode { .. } => "unstable_mode",
            Error::SingularResolvent { .. } => "singular_resolvent",
            Error::NotBracketed { .. } => "not_bracketed",
            Error::Unsupported(_) => "unsupported",
            Error::DimensionGuard { .. } => "dimension_guard",
            Error::DegenerateNullSpace { .. } => "degenerate_null_space",
            Error::DensityMatrix(_) => "density_matrix",
            Error::SweepFailed { .. } => "sweep_failed",
            Error::Config { .. } => "config",
            Error::Io { .. } => "io",
        }
    }
}
