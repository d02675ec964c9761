use thiserror::Error;

/// Errors raised by the models, the solver phases and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A state left the admissible set (non-positive area, non-finite value, ...).
    #[error("inadmissible state: {0}")]
    Domain(String),

    /// The stationary ODE hit a sonic point (c² = u²).
    #[error("sonic singularity of the stationary ODE at x = {x}")]
    Sonic { x: f64 },

    /// A Newton iteration failed to converge.
    #[error("newton iteration did not converge after {iterations} iterations (last iterate {last}, residual {residual:e})")]
    Newton {
        iterations: usize,
        last: f64,
        residual: f64,
    },

    /// The Riemann problem left the subcritical regime.
    #[error("supercritical Riemann problem at x = {x}")]
    Regime { x: f64 },

    /// An intermediate nodal state of the space-time predictor was inadmissible.
    #[error("predictor failure in cell {cell} at iterate {iterate}: {reason}")]
    Predictor {
        cell: usize,
        iterate: usize,
        reason: String,
    },

    /// The explicit update produced an inadmissible state.
    #[error("step failure in cell {cell}: {reason}")]
    Step { cell: usize, reason: String },

    /// Invalid user input (configuration, profiles, CLI arguments).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Attach a spatial location to a Riemann failure.
    pub(crate) fn at(self, x: f64) -> Self {
        match self {
            Error::Regime { .. } => Error::Regime { x },
            other => other,
        }
    }

    /// Configuration errors map to exit code 2, everything else to 3.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Usage(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
