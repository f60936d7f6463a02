use thiserror::Error;

/// Errors raised while building or solving a squeezing-transfer model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("exchange balance violated: gamma_f*N = {lhs:.6e} but gamma_m*n = {rhs:.6e}")]
    ExchangeBalance { lhs: f64, rhs: f64 },

    #[error("drift is not stable: max Re(lambda) = {margin:.6e} (required < {threshold:.6e})")]
    UnstableSystem { margin: f64, threshold: f64 },

    #[error("eigenvalue solver failed to converge")]
    EigenSolver,

    #[error("steady-state solve is singular or ill-conditioned (condition estimate {condition:.3e}, residual {residual:.3e})")]
    SingularSolve { condition: f64, residual: f64 },

    #[error("integration step rejected: {0}")]
    StepSize(String),

    #[error("one-photon detuning must be non-zero")]
    ZeroDetuning,

    #[error("light shift {light_shift:.6e} rad/s has the wrong sign for a positive matching field")]
    NoPositiveField { light_shift: f64 },

    #[error("no squeezing at zero frequency (normalized spectral variance {value:.6})")]
    NoSqueezing { value: f64 },

    #[error("adiabatic elimination outside its validity range: {0}")]
    ValidityViolation(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite, got {value}") })
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {value}") })
    }
}
