//! Helium-3 constants, cell bookkeeping, resonance matching and
//! magnetic-field homogeneity.
//!
//! Fields are in gauss at the interface; every frequency returned is angular.

use std::f64::consts::PI;

use crate::error::{require_positive, Error, Result};

/// Nuclear (ground-state) magnetic moment over h, Hz/G.
pub const MU_I_OVER_H: f64 = 3.24e3;
/// Metastable 2³S₁ magnetic moment over h, Hz/G.
pub const MU_S_OVER_H: f64 = 1.87e6;
/// Metastable wall relaxation at 1 torr, s⁻¹; scales as 1/pressure.
pub const GAMMA_0_AT_1_TORR: f64 = 1e3;
/// Wavelength of the C9 line, m. Informational only.
pub const LAMBDA_C9: f64 = 1.08e-6;
/// Above this field the linear Zeeman effect is no longer trusted.
pub const LOW_FIELD_LIMIT_GAUSS: f64 = 50.0;

const BOLTZMANN: f64 = 1.380_649e-23;
const PASCAL_PER_TORR: f64 = 101_325.0 / 760.0;

/// Constants bundled for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeliumConstants {
    pub mu_i_over_h: f64,
    pub mu_s_over_h: f64,
    pub gamma_0_ref: f64,
    pub lambda_c9: f64,
}

impl HeliumConstants {
    pub const VALUES: HeliumConstants = HeliumConstants {
        mu_i_over_h: MU_I_OVER_H,
        mu_s_over_h: MU_S_OVER_H,
        gamma_0_ref: GAMMA_0_AT_1_TORR,
        lambda_c9: LAMBDA_C9,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasCell {
    /// torr
    pub pressure: f64,
    /// cm³
    pub volume: f64,
    /// K
    pub temperature: f64,
    /// metastable atoms per cm³
    pub metastable_density: f64,
}

impl Default for GasCell {
    /// 1 torr, 50 cm³, 300 K, 3.2e10 metastable atoms/cm³.
    fn default() -> Self {
        Self { pressure: 1.0, volume: 50.0, temperature: 300.0, metastable_density: 3.2e10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasPopulations {
    pub n_ground: f64,
    pub n_meta: f64,
    pub gamma_0: f64,
}

impl GasPopulations {
    /// Exchange rate of a ground-state atom given the metastable one.
    pub fn gamma_f(&self, gamma_m: f64) -> f64 {
        gamma_m * self.n_meta / self.n_ground
    }
}

pub fn gas_populations(cell: &GasCell) -> Result<GasPopulations> {
    require_positive("pressure", cell.pressure)?;
    require_positive("volume", cell.volume)?;
    require_positive("temperature", cell.temperature)?;
    require_positive("metastable_density", cell.metastable_density)?;
    let pascal = cell.pressure * PASCAL_PER_TORR;
    let cubic_m = cell.volume * 1e-6;
    Ok(GasPopulations {
        n_ground: pascal * cubic_m / (BOLTZMANN * cell.temperature),
        n_meta: cell.metastable_density * cell.volume,
        gamma_0: GAMMA_0_AT_1_TORR / cell.pressure,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinSpecies {
    Nuclear,
    Metastable,
}

impl SpinSpecies {
    pub fn mu_over_h(self) -> f64 {
        match self {
            SpinSpecies::Nuclear => MU_I_OVER_H,
            SpinSpecies::Metastable => MU_S_OVER_H,
        }
    }
}

/// Low-field Larmor angular frequency `2π (μ/h) B`.
pub fn larmor(field_gauss: f64, species: SpinSpecies) -> f64 {
    warn_high_field(field_gauss);
    larmor_linear(field_gauss, species)
}

fn larmor_linear(field_gauss: f64, species: SpinSpecies) -> f64 {
    2.0 * PI * species.mu_over_h() * field_gauss
}

fn warn_high_field(field_gauss: f64) {
    if field_gauss.abs() > LOW_FIELD_LIMIT_GAUSS {
        log::warn!("B = {field_gauss:.4} G is beyond the linear Zeeman regime");
    }
}

/// Field and laser frequency difference that put both the metastable and the
/// ground-state coherences on resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub field_gauss: f64,
    /// `ω₁ − ω₂`, rad/s.
    pub delta_las: f64,
    /// `Ω²/Δ`, rad/s.
    pub light_shift: f64,
    pub omega_i: f64,
    pub omega_s: f64,
}

impl OperatingPoint {
    /// `|ω_S + Ω²/Δ − δ_las|`, relative to the largest term.
    pub fn metastable_residual(&self) -> f64 {
        let scale = self.omega_s.abs().max(self.light_shift.abs()).max(self.delta_las.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.omega_s + self.light_shift - self.delta_las).abs() / scale
        }
    }

    /// `|ω_I − δ_las|`, relative.
    pub fn ground_residual(&self) -> f64 {
        let scale = self.omega_i.abs().max(self.delta_las.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.omega_i - self.delta_las).abs() / scale
        }
    }
}

/// Solves `ω_S(B) + Ω²/Δ = ω_I(B) = δ_las` for `B`.
pub fn match_operating_point(omega_rabi: f64, delta_one_photon: f64) -> Result<OperatingPoint> {
    if delta_one_photon == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let light_shift = omega_rabi * omega_rabi / delta_one_photon;
    if light_shift > 0.0 {
        return Err(Error::NoPositiveField { light_shift });
    }
    // Subtracting the two conditions: 2π(μ_S − μ_I)/h · B = −Ω²/Δ.
    let field_gauss = (-light_shift / (2.0 * PI * (MU_S_OVER_H - MU_I_OVER_H))).max(0.0);
    warn_high_field(field_gauss);
    let omega_i = larmor_linear(field_gauss, SpinSpecies::Nuclear);
    let omega_s = larmor_linear(field_gauss, SpinSpecies::Metastable);
    Ok(OperatingPoint { field_gauss, delta_las: omega_i, light_shift, omega_i, omega_s })
}

/// Detuning shifts caused by a field error `ΔB`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldErrorShifts {
    /// Shift of `δ̃` (metastable Larmor change; the light shift is unchanged).
    pub delta_meta: f64,
    /// Shift of `δ_I`.
    pub delta_ground: f64,
}

pub fn field_error_detunings(delta_b_gauss: f64) -> FieldErrorShifts {
    FieldErrorShifts {
        delta_meta: larmor_linear(delta_b_gauss, SpinSpecies::Metastable),
        delta_ground: larmor_linear(delta_b_gauss, SpinSpecies::Nuclear),
    }
}

/// Field-homogeneity thresholds, expressed as relative field errors `ΔB/B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneityReport {
    /// `ω_I ΔB/B < Γ_F`: ground-state dephasing slower than the response rate.
    pub exact_threshold: f64,
    /// `1/(600 |Δ|/(γC))`, the small-Γ rule of thumb.
    pub rule_of_thumb_threshold: f64,
    /// The rule of thumb only applies when `Γ ≪ γ_m`.
    pub rule_of_thumb_applies: bool,
    pub binding_threshold: f64,
    pub db_over_b: f64,
    pub passes: bool,
}

/// Prefactor of the small-Γ homogeneity rule of thumb.
pub const HOMOGENEITY_PREFACTOR: f64 = 600.0;

/// Inputs: the matched field, `Γ_F`, `Γ`, `γ_m`, `γ`, `C` and `Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneityInput {
    pub field_gauss: f64,
    pub memory_bandwidth: f64,
    pub pump_rate: f64,
    pub gamma_m: f64,
    pub gamma: f64,
    pub cooperativity: f64,
    pub delta_one_photon: f64,
}

pub fn homogeneity_check(input: &HomogeneityInput, db_over_b: f64, validity_factor: f64) -> HomogeneityReport {
    let omega_i = larmor_linear(input.field_gauss, SpinSpecies::Nuclear).abs();
    let exact_threshold = if omega_i == 0.0 {
        if input.memory_bandwidth > 0.0 { f64::INFINITY } else { 0.0 }
    } else {
        input.memory_bandwidth / omega_i
    };
    let rule_of_thumb_threshold =
        input.gamma * input.cooperativity / (HOMOGENEITY_PREFACTOR * input.delta_one_photon.abs());
    let rule_of_thumb_applies = input.gamma_m >= validity_factor * input.pump_rate;
    let binding_threshold = if rule_of_thumb_applies {
        exact_threshold.min(rule_of_thumb_threshold)
    } else {
        exact_threshold
    };
    HomogeneityReport {
        exact_threshold,
        rule_of_thumb_threshold,
        rule_of_thumb_applies,
        binding_threshold,
        db_over_b,
        passes: db_over_b.abs() < binding_threshold,
    }
}
