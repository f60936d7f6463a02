use std::f64::consts::PI;
use std::fmt;

use crate::analytic::{adiabatic_validity, analytic_regime, memory_bandwidth, pump_rate};
use crate::error::{Error, Result};
use crate::helium::{homogeneity_check, GasPopulations, HomogeneityInput, HomogeneityReport, OperatingPoint};

use super::config::ExperimentConfig;
use super::fmt_sci;

/// Everything needed to set up the reference point `Γ = pump_ratio·γm`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPointReport {
    pub config: ExperimentConfig,
    pub gas: GasPopulations,
    pub gamma_f: f64,
    pub gamma_0: f64,
    pub pump_rate: f64,
    /// Helium Rabi frequency.
    pub omega_rabi: f64,
    pub point: OperatingPoint,
    pub memory_bandwidth: f64,
    pub memory_time: f64,
    pub adiabatic_valid: bool,
    pub regime_valid: bool,
    /// Names of the failing validity conditions.
    pub validity_failures: Vec<String>,
    pub homogeneity: HomogeneityReport,
}

pub fn run_operating_point_report(cfg: &ExperimentConfig, db_over_b: f64) -> Result<OperatingPointReport> {
    let ctx = |e: Error| Error::Config(format!("operating point at Γ/γm = {}: {e}", cfg.pump_ratio));
    cfg.validate()?;
    let gas = cfg.gas().map_err(ctx)?;
    let gamma_0 = cfg.gamma_0_or_gas().map_err(ctx)?;
    let omega_rabi = cfg.helium_rabi(cfg.pump_ratio).map_err(ctx)?;
    let point = cfg.operating_point(cfg.pump_ratio).map_err(ctx)?;
    let gamma_pump = pump_rate(omega_rabi, cfg.delta_one_photon(), cfg.gamma, cfg.cooperativity, cfg.level_factor)
        .map_err(ctx)?;
    let gamma_f = gas.gamma_f(cfg.gamma_m);
    let bw = memory_bandwidth(gamma_f, cfg.gamma_m, gamma_pump);

    let (params, _) = cfg.engine_params(cfg.pump_ratio, 0.0, cfg.r_squeeze(), gamma_0).map_err(ctx)?;
    let derived = cfg.derived(&params).map_err(ctx)?;
    let adiabatic = adiabatic_validity(&params, &derived, cfg.validity_factor);
    let regime = analytic_regime(&params, &derived, cfg.validity_factor);
    let validity_failures = adiabatic.failures().chain(regime.failures()).map(|c| c.name.to_string()).collect();

    let homogeneity = homogeneity_check(
        &HomogeneityInput {
            field_gauss: point.field_gauss,
            memory_bandwidth: bw.rate,
            pump_rate: gamma_pump,
            gamma_m: cfg.gamma_m,
            gamma: cfg.gamma,
            cooperativity: cfg.cooperativity,
            delta_one_photon: cfg.delta_one_photon(),
        },
        db_over_b,
        cfg.validity_factor,
    );

    Ok(OperatingPointReport {
        config: cfg.clone(),
        gas,
        gamma_f,
        gamma_0,
        pump_rate: gamma_pump,
        omega_rabi,
        point,
        memory_bandwidth: bw.rate,
        memory_time: bw.time,
        adiabatic_valid: adiabatic.passes(),
        regime_valid: regime.passes(),
        validity_failures,
        homogeneity,
    })
}

impl OperatingPointReport {
    fn fields(&self) -> Vec<(&'static str, f64)> {
        let h = &self.homogeneity;
        vec![
            ("pressure_torr", self.config.cell.pressure),
            ("n_ground", self.gas.n_ground),
            ("n_meta", self.gas.n_meta),
            ("gamma_f", self.gamma_f),
            ("gamma_0", self.gamma_0),
            ("cooperativity", self.config.cooperativity),
            ("pump_ratio", self.config.pump_ratio),
            ("gamma_pump", self.pump_rate),
            ("omega_rabi", self.omega_rabi),
            ("light_shift", self.point.light_shift),
            ("field_mG", self.point.field_gauss * 1e3),
            ("delta_las_hz", self.point.delta_las / (2.0 * PI)),
            ("omega_i_hz", self.point.omega_i / (2.0 * PI)),
            ("omega_s_hz", self.point.omega_s / (2.0 * PI)),
            ("metastable_residual", self.point.metastable_residual()),
            ("ground_residual", self.point.ground_residual()),
            ("memory_bandwidth", self.memory_bandwidth),
            ("memory_time_s", self.memory_time),
            ("homogeneity_exact", h.exact_threshold),
            ("homogeneity_rule_of_thumb", h.rule_of_thumb_threshold),
            ("homogeneity_binding", h.binding_threshold),
            ("db_over_b", h.db_over_b),
        ]
    }

    fn flags(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("rule_of_thumb_applies", self.homogeneity.rule_of_thumb_applies),
            ("homogeneity_passes", self.homogeneity.passes),
            ("adiabatic_valid", self.adiabatic_valid),
            ("regime_valid", self.regime_valid),
        ]
    }

    pub fn csv(&self) -> String {
        let fields = self.fields();
        let flags = self.flags();
        let header: Vec<&str> = fields.iter().map(|f| f.0).chain(flags.iter().map(|f| f.0)).collect();
        let values: Vec<String> = fields
            .iter()
            .map(|f| fmt_sci(f.1))
            .chain(flags.iter().map(|f| u8::from(f.1).to_string()))
            .collect();
        format!("{}\n{}\n", header.join(","), values.join(","))
    }
}

impl fmt::Display for OperatingPointReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.fields() {
            writeln!(f, "{k:<28}{v:.6e}")?;
        }
        for (k, v) in self.flags() {
            writeln!(f, "{k:<28}{v}")?;
        }
        if !self.validity_failures.is_empty() {
            writeln!(f, "{:<28}{}", "failing_conditions", self.validity_failures.join("; "))?;
        }
        Ok(())
    }
}
