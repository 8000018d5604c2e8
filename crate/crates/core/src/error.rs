use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a physical formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter or composite failed validation; `field` names the offender.
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },

    #[error("unstable system: drift eigenvalue {eigenvalue} has non-negative real part")]
    Unstable { eigenvalue: Complex64 },

    #[error(
        "singular susceptibility at omega = {omega} rad/s (closest drift eigenvalue {eigenvalue})"
    )]
    Singular { omega: f64, eigenvalue: Complex64 },

    #[error("eigenvalue solver did not converge")]
    EigenSolver,

    #[error("susceptibility residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("invalid frequency grid: {0}")]
    Grid(String),

    #[error("insufficient spectral coverage: tail holds {tail_fraction:.3e} of the integral; extend span to at least {required_span:e} rad/s around {center:e} rad/s")]
    Coverage {
        tail_fraction: f64,
        required_span: f64,
        center: f64,
    },

    #[error("quadrature error estimate {estimate:e} exceeds {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("{count} of {total} spectral points were negative beyond roundoff")]
    NegativeSpectrum { count: usize, total: usize },

    #[error("lorentzian fit failed: {0}")]
    FitFailure(String),

    #[error("out of regime: {0}")]
    Regime(String),

    #[error("no interior minimum in bracket [{lo}, {hi}]")]
    NoInteriorMinimum { lo: f64, hi: f64 },

    #[error(transparent)]
    Config(#[from] crate::cli::ConfigError),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("output error: {0}")]
    Output(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Stable machine-readable identifier used in the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain_error",
            Error::Invalid { .. } => "invalid_parameter",
            Error::Unstable { .. } => "unstable_system",
            Error::Singular { .. } => "singular_matrix",
            Error::EigenSolver => "eigensolver_failure",
            Error::Residual { .. } => "residual_check",
            Error::Grid(_) => "invalid_grid",
            Error::Coverage { .. } => "insufficient_coverage",
            Error::Quadrature { .. } => "quadrature_error",
            Error::NegativeSpectrum { .. } => "negative_spectrum",
            Error::FitFailure(_) => "fit_failure",
            Error::Regime(_) => "out_of_regime",
            Error::NoInteriorMinimum { .. } => "no_interior_minimum",
            Error::Config(_) => "config_error",
            Error::Io(_) => "io_error",
            Error::Output(_) => "output_error",
        }
    }

    /// 0 success, 1 usage/config, 2 physics/regime, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Invalid { .. } | Error::Io(_) | Error::Output(_) => 1,
            Error::Domain(_)
            | Error::Unstable { .. }
            | Error::Regime(_)
            | Error::FitFailure(_)
            | Error::NoInteriorMinimum { .. }
            | Error::Coverage { .. }
            | Error::Grid(_) => 2,
            Error::Singular { .. }
            | Error::EigenSolver
            | Error::Residual { .. }
            | Error::Quadrature { .. }
            | Error::NegativeSpectrum { .. } => 3,
        }
    }
}
