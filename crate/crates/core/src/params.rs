//! Physical configuration of one light / metastable / ground-state setup.

use crate::config::KeyValues;
use crate::error::{require_finite, require_positive, Error, Result};

/// Relative tolerance on `gamma_f * N == gamma_m * n`.
pub const EXCHANGE_BALANCE_TOL: f64 = 1e-12;

/// All rates (s⁻¹), detunings (rad/s), populations and input squeezing of a
/// single configuration. Frequencies are angular throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Optical coherence decay rate.
    pub gamma: f64,
    /// Cavity field decay rate.
    pub kappa: f64,
    /// Exchange rate seen by one metastable atom.
    pub gamma_m: f64,
    /// Exchange rate seen by one ground-state atom.
    pub gamma_f: f64,
    /// Extra damping of the metastable coherence (wall relaxation).
    pub gamma_0: f64,
    /// Coherent drive Rabi frequency (real).
    pub omega_rabi: f64,
    /// One-photon detuning of the optical transition.
    pub delta_one_photon: f64,
    /// Metastable two-photon detuning before the light shift.
    pub delta_meta: f64,
    /// Ground-state detuning.
    pub delta_ground: f64,
    /// Cavity detuning.
    pub delta_cavity: f64,
    /// Single-atom cavity coupling.
    pub g_coupling: f64,
    /// Metastable atom number `n`.
    pub n_meta: f64,
    /// Ground-state atom number `N`.
    pub n_ground: f64,
    /// Input squeezing parameter; `r > 0` squeezes the X quadrature.
    pub r_squeeze: f64,
}

impl PhysicalParams {
    /// Ground-state exchange rate implied by exchange balance.
    pub fn balanced_gamma_f(gamma_m: f64, n_meta: f64, n_ground: f64) -> f64 {
        gamma_m * n_meta / n_ground
    }

    /// Re-derives `gamma_f` from `gamma_m` and the populations.
    pub fn rebalance(mut self) -> Self {
        self.gamma_f = Self::balanced_gamma_f(self.gamma_m, self.n_meta, self.n_ground);
        self
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("gamma", self.gamma)?;
        require_positive("kappa", self.kappa)?;
        require_positive("gamma_m", self.gamma_m)?;
        require_positive("gamma_f", self.gamma_f)?;
        require_finite("gamma_0", self.gamma_0)?;
        if self.gamma_0 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "gamma_0",
                reason: format!("must be >= 0, got {}", self.gamma_0),
            });
        }
        require_finite("omega_rabi", self.omega_rabi)?;
        require_finite("delta_one_photon", self.delta_one_photon)?;
        require_finite("delta_meta", self.delta_meta)?;
        require_finite("delta_ground", self.delta_ground)?;
        require_finite("delta_cavity", self.delta_cavity)?;
        require_finite("g_coupling", self.g_coupling)?;
        require_positive("n_meta", self.n_meta)?;
        require_positive("n_ground", self.n_ground)?;
        require_finite("r_squeeze", self.r_squeeze)?;

        let lhs = self.gamma_f * self.n_ground;
        let rhs = self.gamma_m * self.n_meta;
        if (lhs - rhs).abs() > EXCHANGE_BALANCE_TOL * lhs.abs().max(rhs.abs()) {
            return Err(Error::ExchangeBalance { lhs, rhs });
        }
        Ok(())
    }

    pub fn input_stats(&self) -> InputFieldStats {
        InputFieldStats::from_squeezing(self.r_squeeze)
    }

    /// Reads parameters from a flat key-value configuration. `gamma_f` may be
    /// omitted, in which case it is derived from exchange balance.
    pub fn from_key_values(kv: &mut KeyValues) -> Result<Self> {
        fn req(kv: &mut KeyValues, key: &'static str) -> Result<f64> {
            kv.take_f64(key)?
                .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
        }
        let gamma_m = req(kv, "gamma_m")?;
        let n_meta = req(kv, "n_meta")?;
        let n_ground = req(kv, "n_ground")?;
        let gamma_f = kv
            .take_f64("gamma_f")?
            .unwrap_or_else(|| Self::balanced_gamma_f(gamma_m, n_meta, n_ground));
        let params = Self {
            gamma: req(kv, "gamma")?,
            kappa: req(kv, "kappa")?,
            gamma_m,
            gamma_f,
            gamma_0: kv.take_f64("gamma_0")?.unwrap_or(0.0),
            omega_rabi: kv.take_f64("omega_rabi")?.unwrap_or(0.0),
            delta_one_photon: req(kv, "delta_one_photon")?,
            delta_meta: kv.take_f64("delta_meta")?.unwrap_or(0.0),
            delta_ground: kv.take_f64("delta_ground")?.unwrap_or(0.0),
            delta_cavity: kv.take_f64("delta_cavity")?.unwrap_or(0.0),
            g_coupling: kv.take_f64("g_coupling")?.unwrap_or(0.0),
            n_meta,
            n_ground,
            r_squeeze: kv.take_f64("r_squeeze")?.unwrap_or(0.0),
        };
        params.validate()?;
        Ok(params)
    }
}

/// Broadband second moments of a squeezed-vacuum input field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputFieldStats {
    /// `<A_in† A_in>` per unit bandwidth, `sinh² r`.
    pub n_therm: f64,
    /// `<A_in A_in>` per unit bandwidth, `-sinh r cosh r`.
    pub m_anom: f64,
}

impl InputFieldStats {
    pub fn vacuum() -> Self {
        Self { n_therm: 0.0, m_anom: 0.0 }
    }

    pub fn from_squeezing(r: f64) -> Self {
        let (s, c) = (r.sinh(), r.cosh());
        Self { n_therm: s * s, m_anom: -s * c }
    }

    /// Squeezing parameter for a target X-quadrature variance `e^{-2r}`.
    pub fn r_for_x_variance(var_x: f64) -> f64 {
        -0.5 * var_x.ln()
    }

    pub fn var_x(&self) -> f64 {
        1.0 + 2.0 * self.n_therm + 2.0 * self.m_anom
    }

    pub fn var_y(&self) -> f64 {
        1.0 + 2.0 * self.n_therm - 2.0 * self.m_anom
    }
}
