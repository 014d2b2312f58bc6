use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("incompatible grids: {0}")]
    GridMismatch(String),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("linear solver failed: {0}")]
    LinearSolver(String),
    #[error("degenerate seed: {0}")]
    DegenerateSeed(String),
    #[error("blow-up suspected at t = {t}: max |phi| = {max_amplitude:.3e}")]
    BlowUp { t: f64, max_amplitude: f64 },
    #[error("integrator health check failed at t = {t}: relative mass drift {drift:.3e}")]
    IntegratorHealth { t: f64, drift: f64 },
    #[error("placement error: {0}")]
    Placement(String),
    #[error("ordering error: {0}")]
    Ordering(String),
    #[error("tube exit at t = {t}: distance {distance:.3e} exceeds {limit:.3e}")]
    TubeExit { t: f64, distance: f64, limit: f64 },
    #[error("format error: {0}")]
    Format(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used by the command line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Grid(_) => "grid",
            Error::Domain(_) => "domain",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::NoConvergence { .. } => "no_convergence",
            Error::LinearSolver(_) => "linear_solver",
            Error::DegenerateSeed(_) => "degenerate_seed",
            Error::BlowUp { .. } => "blow_up",
            Error::IntegratorHealth { .. } => "integrator_health",
            Error::Placement(_) => "placement",
            Error::Ordering(_) => "ordering",
            Error::TubeExit { .. } => "tube_exit",
            Error::Format(_) => "format",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Grid(_)
                | Error::Domain(_)
                | Error::GridMismatch(_)
                | Error::Placement(_)
                | Error::Ordering(_)
                | Error::Format(_)
                | Error::Config(_)
                | Error::DegenerateSeed(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
