use std::path::PathBuf;

use crate::analytic::{cooperativity, rabi_for_pump_rate, DerivedParams, DEFAULT_VALIDITY_FACTOR};
use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::helium::{field_error_detunings, gas_populations, match_operating_point, GasCell, GasPopulations, OperatingPoint};
use crate::params::{InputFieldStats, PhysicalParams};

/// Relative field errors used by the field-error sweep when none are given:
/// zero, one value below the homogeneity threshold and one just at it.
pub const DEFAULT_DB_OVER_B: [f64; 3] = [0.0, 1e-4, 4e-4];

/// Setup shared by every experiment. Defaults describe the reference helium
/// cell: γ = 2e7 s⁻¹, κ = 100γ, Δ = −2000γ, γm = 5e6 s⁻¹, C = 500,
/// input X variance 0.5, 1 torr / 50 cm³ / 300 K, 3.2e10 metastables per cm³.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub gamma: f64,
    pub kappa_over_gamma: f64,
    pub delta_over_gamma: f64,
    pub gamma_m: f64,
    pub cooperativity: f64,
    /// `e^{−2r}` of the input field.
    pub x_variance: f64,
    /// Pump-rate factor of the real atom (3 for helium-3). The simulated
    /// spin-1/2 system is always driven so that its own Γ hits the target.
    pub level_factor: f64,
    /// `Γ/γm` for single-point experiments.
    pub pump_ratio: f64,
    /// Overrides the pressure law when set.
    pub gamma_0: Option<f64>,
    pub cell: GasCell,
    pub validity_factor: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            gamma: 2e7,
            kappa_over_gamma: 100.0,
            delta_over_gamma: -2000.0,
            gamma_m: 5e6,
            cooperativity: 500.0,
            x_variance: 0.5,
            level_factor: 3.0,
            pump_ratio: 0.1,
            gamma_0: None,
            cell: GasCell::default(),
            validity_factor: DEFAULT_VALIDITY_FACTOR,
        }
    }
}

impl ExperimentConfig {
    /// Consumes the experiment keys from `kv`; unknown keys are left in place
    /// for the caller to reject.
    pub fn from_key_values(kv: &mut KeyValues) -> Result<Self> {
        let d = Self::default();
        let x_variance = match (kv.take_f64("x_variance")?, kv.take_f64("r_squeeze")?) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either `x_variance` or `r_squeeze`, not both".into()));
            }
            (Some(v), None) => v,
            (None, Some(r)) => (-2.0 * r).exp(),
            (None, None) => d.x_variance,
        };
        let cfg = Self {
            gamma: kv.take_f64("gamma")?.unwrap_or(d.gamma),
            kappa_over_gamma: kv.take_f64("kappa_over_gamma")?.unwrap_or(d.kappa_over_gamma),
            delta_over_gamma: kv.take_f64("delta_over_gamma")?.unwrap_or(d.delta_over_gamma),
            gamma_m: kv.take_f64("gamma_m")?.unwrap_or(d.gamma_m),
            cooperativity: kv.take_f64("cooperativity")?.unwrap_or(d.cooperativity),
            x_variance,
            level_factor: kv.take_f64("level_factor")?.unwrap_or(d.level_factor),
            pump_ratio: kv.take_f64("pump_ratio")?.unwrap_or(d.pump_ratio),
            gamma_0: kv.take_f64("gamma_0")?,
            cell: GasCell {
                pressure: kv.take_f64("pressure")?.unwrap_or(d.cell.pressure),
                volume: kv.take_f64("volume")?.unwrap_or(d.cell.volume),
                temperature: kv.take_f64("temperature")?.unwrap_or(d.cell.temperature),
                metastable_density: kv.take_f64("metastable_density")?.unwrap_or(d.cell.metastable_density),
            },
            validity_factor: kv.take_f64("validity_factor")?.unwrap_or(d.validity_factor),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("kappa_over_gamma", self.kappa_over_gamma),
            ("gamma_m", self.gamma_m),
            ("x_variance", self.x_variance),
            ("level_factor", self.level_factor),
            ("validity_factor", self.validity_factor),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("`{name}` must be positive and finite, got {v}")));
            }
        }
        if !(self.cooperativity >= 0.0) || !self.cooperativity.is_finite() {
            return Err(Error::Config(format!("`cooperativity` must be >= 0, got {}", self.cooperativity)));
        }
        if !(self.pump_ratio >= 0.0) || !self.pump_ratio.is_finite() {
            return Err(Error::Config(format!("`pump_ratio` must be >= 0, got {}", self.pump_ratio)));
        }
        if self.delta_over_gamma == 0.0 || !self.delta_over_gamma.is_finite() {
            return Err(Error::Config("`delta_over_gamma` must be finite and nonzero".into()));
        }
        if let Some(g0) = self.gamma_0 {
            if !(g0 >= 0.0) || !g0.is_finite() {
                return Err(Error::Config(format!("`gamma_0` must be >= 0, got {g0}")));
            }
        }
        gas_populations(&self.cell).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_over_gamma * self.gamma
    }

    pub fn delta_one_photon(&self) -> f64 {
        self.delta_over_gamma * self.gamma
    }

    pub fn r_squeeze(&self) -> f64 {
        InputFieldStats::r_for_x_variance(self.x_variance)
    }

    pub fn gas(&self) -> Result<GasPopulations> {
        gas_populations(&self.cell)
    }

    /// `γ0` from the override or, failing that, the pressure law.
    pub fn gamma_0_or_gas(&self) -> Result<f64> {
        Ok(match self.gamma_0 {
            Some(g) => g,
            None => self.gas()?.gamma_0,
        })
    }

    /// Helium Rabi frequency that yields `Γ = ratio·γm`.
    pub fn helium_rabi(&self, ratio: f64) -> Result<f64> {
        rabi_for_pump_rate(ratio * self.gamma_m, self.delta_one_photon(), self.gamma, self.cooperativity, self.level_factor)
    }

    pub fn operating_point(&self, ratio: f64) -> Result<OperatingPoint> {
        match_operating_point(self.helium_rabi(ratio)?, self.delta_one_photon())
    }

    /// Engine parameters at pump ratio `ratio`, relative field error
    /// `db_over_b` and input squeezing `r`. The cavity detuning cancels the
    /// dispersive shift of the atoms, and the two-photon detuning cancels the
    /// light shift, so only the field error detunes the spins.
    pub fn engine_params(&self, ratio: f64, db_over_b: f64, r: f64, gamma_0: f64) -> Result<(PhysicalParams, OperatingPoint)> {
        let gas = self.gas()?;
        let delta = self.delta_one_photon();
        let kappa = self.kappa();
        let op = self.operating_point(ratio)?;
        let omega = rabi_for_pump_rate(ratio * self.gamma_m, delta, self.gamma, self.cooperativity, 1.0)?;
        let shifts = field_error_detunings(db_over_b * op.field_gauss);
        let g = (self.cooperativity * kappa * self.gamma / gas.n_meta).sqrt();
        let params = PhysicalParams {
            gamma: self.gamma,
            kappa,
            gamma_m: self.gamma_m,
            gamma_f: gas.gamma_f(self.gamma_m),
            gamma_0,
            omega_rabi: omega,
            delta_one_photon: delta,
            delta_meta: -omega * omega / delta + shifts.delta_meta,
            delta_ground: shifts.delta_ground,
            delta_cavity: self.cooperativity * kappa * self.gamma / delta,
            g_coupling: g,
            n_meta: gas.n_meta,
            n_ground: gas.n_ground,
            r_squeeze: r,
        };
        params.validate()?;
        debug_assert!((cooperativity(g, gas.n_meta, kappa, self.gamma)? / self.cooperativity.max(1e-300) - 1.0).abs() < 1e-9
            || self.cooperativity == 0.0);
        Ok((params, op))
    }

    pub fn derived(&self, params: &PhysicalParams) -> Result<DerivedParams> {
        DerivedParams::from_params(params, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// `Γ/γm`.
    GammaRatio,
    /// `Γ/γm` crossed with a list of `ΔB/B`.
    FieldError,
    /// Input `e^{−2r}` at the configured pump ratio.
    SqueezingInput,
}

impl SweepKind {
    pub fn value_name(self) -> &'static str {
        match self {
            SweepKind::GammaRatio | SweepKind::FieldError => "gamma_ratio",
            SweepKind::SqueezingInput => "x_variance",
        }
    }

    fn default_grid(self) -> Grid {
        match self {
            SweepKind::GammaRatio | SweepKind::FieldError => Grid { kind: GridKind::Log, min: 1e-3, max: 1e2, points: 61 },
            SweepKind::SqueezingInput => Grid { kind: GridKind::Linear, min: 0.1, max: 1.0, points: 10 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub kind: GridKind,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Config(format!("grid needs min < max, got {} .. {}", self.min, self.max)));
        }
        if self.points < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {}", self.points)));
        }
        if self.kind == GridKind::Log && !(self.min > 0.0) {
            return Err(Error::Config(format!("log grid needs a positive minimum, got {}", self.min)));
        }
        Ok(())
    }

    /// Grid values; both endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == self.points - 1 {
                    return self.max;
                }
                let t = i as f64 / last;
                match self.kind {
                    GridKind::Linear => self.min + t * (self.max - self.min),
                    GridKind::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub grid: Grid,
    /// Relative field errors; only the field-error sweep reads these.
    pub db_over_b: Vec<f64>,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn new(kind: SweepKind) -> Self {
        Self { kind, grid: kind.default_grid(), db_over_b: DEFAULT_DB_OVER_B.to_vec(), output: None }
    }

    /// Reads `grid`, `grid_min`, `grid_max`, `points`, `db_over_b` and
    /// `output`.
    pub fn from_key_values(kind: SweepKind, kv: &mut KeyValues) -> Result<Self> {
        let mut spec = Self::new(kind);
        if let Some(g) = kv.take_string("grid") {
            spec.grid.kind = match g.as_str() {
                "log" => GridKind::Log,
                "linear" => GridKind::Linear,
                other => return Err(Error::Config(format!("`grid` must be `log` or `linear`, got `{other}`"))),
            };
        }
        if let Some(v) = kv.take_f64("grid_min")? {
            spec.grid.min = v;
        }
        if let Some(v) = kv.take_f64("grid_max")? {
            spec.grid.max = v;
        }
        if let Some(v) = kv.take_usize("points")? {
            spec.grid.points = v;
        }
        if let Some(v) = kv.take_f64_list("db_over_b")? {
            spec.db_over_b = v;
        }
        spec.output = kv.take_string("output").map(PathBuf::from);
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.kind == SweepKind::SqueezingInput && !(self.grid.min > 0.0) {
            return Err(Error::Config("x_variance grid must be positive".into()));
        }
        if self.kind == SweepKind::FieldError {
            if self.db_over_b.is_empty() {
                return Err(Error::Config("`db_over_b` list is empty".into()));
            }
            if let Some(v) = self.db_over_b.iter().find(|v| !v.is_finite()) {
                return Err(Error::Config(format!("`db_over_b` entries must be finite, got {v}")));
            }
        }
        Ok(())
    }
}
