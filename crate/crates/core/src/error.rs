use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The closed forms exist only for a carrier below the transition frequency.
    #[error("analytic branch undefined: carrier {carrier} must be below transition frequency {transition}")]
    BranchUndefined { carrier: f64, transition: f64 },

    #[error("closed form derived for square pulse only (got {0})")]
    ShapeMismatch(String),

    #[error("time {t} lies outside the pulse support [{start}, {end}]")]
    OutsidePulse { t: f64, start: f64, end: f64 },

    #[error("final-state closed forms need an integer number of cycles (got {0})")]
    NonIntegerCycles(f64),

    #[error("quadrature did not converge: achieved error estimate {estimate:e}, target {target:e}")]
    QuadratureNonConvergence { estimate: f64, target: f64 },

    #[error("norm drift {drift:e} at t = {t} exceeds {limit:e}")]
    NormDrift { t: f64, drift: f64, limit: f64 },

    #[error("adaptive step {step:e} fell below the floor {floor:e} at t = {t}")]
    StepUnderflow { t: f64, step: f64, floor: f64 },

    #[error("|D| = {magnitude:e} at t = {t} is below the division guard")]
    DivisionGuard { t: f64, magnitude: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::BranchUndefined { .. } => "branch_undefined",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::OutsidePulse { .. } => "outside_pulse",
            Error::NonIntegerCycles(_) => "non_integer_cycles",
            Error::QuadratureNonConvergence { .. } => "quadrature_non_convergence",
            Error::NormDrift { .. } => "norm_drift",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::DivisionGuard { .. } => "division_guard",
        }
    }

    /// Errors raised while integrating or evaluating numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. }
                | Error::NormDrift { .. }
                | Error::StepUnderflow { .. }
                | Error::DivisionGuard { .. }
        )
    }
}
