use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a function (e.g. `log_gamma(-1)`).
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// Parameter combination rejected by an admissibility window.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("grid error: {0}")]
    Grid(String),

    /// Adaptive quadrature ran out of budget before meeting its tolerance.
    #[error("quadrature tolerance not met: estimate {estimate:e}, error {error:e} (wanted {wanted:e})")]
    Quadrature {
        estimate: f64,
        error: f64,
        wanted: f64,
    },

    #[error("eigensolver did not converge: {detail} (max residual {residual:e})")]
    Convergence { detail: String, residual: f64 },

    /// `H0 + tau` is not positive definite, so the Birman-Schwinger operator is undefined.
    #[error("singular shift: tau = {tau} with lowest eigenvalue of H0 at {lowest}")]
    SingularShift { tau: f64, lowest: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(detail: impl Into<String>) -> Self {
        Error::Parameter(detail.into())
    }

    /// Process exit code for the CLI: 2 for bad input, 3 for solver failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain { .. } | Error::Parameter(_) | Error::Grid(_) | Error::Config(_) => 2,
            Error::Quadrature { .. } | Error::Convergence { .. } | Error::SingularShift { .. } => 3,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 3,
        }
    }
}
