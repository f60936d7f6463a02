//! Fixed-step RK4 integration of the moment equation, used as an oracle
//! independent of the algebraic steady-state solve.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::model::{check_stability, LangevinSystem, Stability};

use super::MomentMatrix;

/// Largest accepted `dt · max|Re λ|`.
pub const MAX_DT_DECAY: f64 = 0.1;
/// Largest accepted `dt · max|λ|`; RK4 is unstable on the imaginary axis
/// beyond 2√2.
pub const MAX_DT_MODULUS: f64 = 2.0;
/// Required `t_final · min|Re λ|`.
pub const MIN_RELAXATION_TIMES: f64 = 20.0;
const MAX_STEPS: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t_final: f64,
    pub dt: f64,
}

/// Time step and horizon that satisfy every integration precondition.
pub fn integration_schedule(stability: &Stability) -> Schedule {
    let dt = (MAX_DT_DECAY / stability.max_decay).min(0.5 * MAX_DT_MODULUS / stability.max_modulus);
    Schedule { t_final: MIN_RELAXATION_TIMES / stability.min_decay, dt }
}

fn check_step(stability: &Stability, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::StepSize(format!("dt must be positive, got {dt}")));
    }
    if dt * stability.max_decay > MAX_DT_DECAY * (1.0 + 1e-12) {
        return Err(Error::StepSize(format!(
            "dt = {dt:.3e} exceeds {MAX_DT_DECAY}/max|Re λ| = {:.3e}",
            MAX_DT_DECAY / stability.max_decay
        )));
    }
    if dt * stability.max_modulus > MAX_DT_MODULUS {
        return Err(Error::StepSize(format!(
            "dt = {dt:.3e} exceeds the RK4 stability bound {MAX_DT_MODULUS}/max|λ| = {:.3e}",
            MAX_DT_MODULUS / stability.max_modulus
        )));
    }
    Ok(())
}

/// Integrates `dM/dt = A M + M Aᵀ + D` from `M(0) = 0` and returns `M(t_final)`.
pub fn integrate_moments(system: &LangevinSystem, t_final: f64, dt: f64) -> Result<MomentMatrix> {
    let stability = check_stability(system)?;
    stability.require_stable()?;
    if t_final * stability.min_decay < MIN_RELAXATION_TIMES * (1.0 - 1e-12) {
        return Err(Error::StepSize(format!(
            "t_final = {t_final:.3e} is shorter than {MIN_RELAXATION_TIMES} slowest relaxation times ({:.3e})",
            MIN_RELAXATION_TIMES / stability.min_decay
        )));
    }
    let zero = CMatrix::zeros(system.dim(), system.dim());
    let moments = run(system, &stability, &zero, t_final, dt)?;
    Ok(MomentMatrix { basis: system.basis.clone(), moments, populations: system.populations })
}

/// Integrates from an arbitrary initial moment matrix (raw operator units).
/// Only the step size is checked, so marginally stable systems are allowed.
pub fn integrate_moments_from(system: &LangevinSystem, initial: &CMatrix, t_final: f64, dt: f64) -> Result<CMatrix> {
    let stability = check_stability(system)?;
    run(system, &stability, initial, t_final, dt)
}

fn run(system: &LangevinSystem, stability: &Stability, initial: &CMatrix, t_final: f64, dt: f64) -> Result<CMatrix> {
    check_step(stability, dt)?;
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::StepSize(format!("t_final must be finite and >= 0, got {t_final}")));
    }
    let steps = (t_final / dt).ceil();
    if steps > MAX_STEPS as f64 {
        return Err(Error::StepSize(format!("{steps:.3e} steps exceeds the limit of {MAX_STEPS}")));
    }
    let steps = steps as u64;
    let h = if steps == 0 { 0.0 } else { t_final / steps as f64 };

    let scales = system.scales();
    let a = system.scaled_drift();
    let at = a.transpose();
    let d = system.scaled_diffusion();
    let rhs = |m: &CMatrix| -> CMatrix { &a * m + m * &at + &d };

    let mut m = linalg::scale_noise(initial, &scales);
    let half = Complex64::from(0.5 * h);
    let full = Complex64::from(h);
    let sixth = Complex64::from(h / 6.0);
    let two = Complex64::from(2.0);
    for _ in 0..steps {
        let k1 = rhs(&m);
        let k2 = rhs(&(&m + &k1 * half));
        let k3 = rhs(&(&m + &k2 * half));
        let k4 = rhs(&(&m + &k3 * full));
        m += (k1 + (k2 + k3) * two + k4) * sixth;
    }
    Ok(linalg::unscale_moments(&m, &scales))
}
