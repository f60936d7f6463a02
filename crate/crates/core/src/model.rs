//! Linearized Heisenberg–Langevin model around the fully polarized state.
//!
//! Fluctuation operators are ordered
//! `[δS21, δS12, δS23, δS32, δI09, δI90, δA, δA†]`. The system evolves as
//! `dv/dt = A v + f` with `<f_α(t) f_β(t')> = D_αβ δ(t - t')`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::params::{InputFieldStats, PhysicalParams};

/// Fluctuation operator labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    S21,
    S12,
    S23,
    S32,
    I09,
    I90,
    A,
    ADag,
}

impl Operator {
    pub const FULL_BASIS: [Operator; 8] = [
        Operator::S21,
        Operator::S12,
        Operator::S23,
        Operator::S32,
        Operator::I09,
        Operator::I90,
        Operator::A,
        Operator::ADag,
    ];

    /// Hermitian-conjugate partner.
    pub fn partner(self) -> Operator {
        use Operator::*;
        match self {
            S21 => S12,
            S12 => S21,
            S23 => S32,
            S32 => S23,
            I09 => I90,
            I90 => I09,
            A => ADag,
            ADag => A,
        }
    }

    pub fn label(self) -> &'static str {
        use Operator::*;
        match self {
            S21 => "S21",
            S12 => "S12",
            S23 => "S23",
            S32 => "S32",
            I09 => "I09",
            I90 => "I90",
            A => "A",
            ADag => "A+",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Mean populations that fix the commutators of the linearized operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    pub n_meta: f64,
    pub n_ground: f64,
}

impl Populations {
    /// Steady value of `[α, β]` in the polarized state.
    pub fn commutator(&self, alpha: Operator, beta: Operator) -> f64 {
        use Operator::*;
        match (alpha, beta) {
            (S21, S12) | (S23, S32) => self.n_meta,
            (S12, S21) | (S32, S23) => -self.n_meta,
            (I09, I90) => self.n_ground,
            (I90, I09) => -self.n_ground,
            (A, ADag) => 1.0,
            (ADag, A) => -1.0,
            _ => 0.0,
        }
    }

    /// Natural fluctuation amplitude: `√n`, `√N` or 1.
    pub fn scale(&self, op: Operator) -> f64 {
        use Operator::*;
        match op {
            S21 | S12 | S23 | S32 => self.n_meta.sqrt(),
            I09 | I90 => self.n_ground.sqrt(),
            A | ADag => 1.0,
        }
    }
}

/// Ordered operator basis with drift and diffusion matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LangevinSystem {
    pub basis: Vec<Operator>,
    pub drift: CMatrix,
    pub diffusion: CMatrix,
    /// Diffusion of the same system driven by a vacuum input field. Serves as
    /// the coherent-state reference for squeezing spectra.
    pub vacuum_diffusion: CMatrix,
    pub populations: Populations,
}

impl LangevinSystem {
    pub fn new(
        basis: Vec<Operator>,
        drift: CMatrix,
        diffusion: CMatrix,
        vacuum_diffusion: CMatrix,
        populations: Populations,
    ) -> Result<Self> {
        let n = basis.len();
        for (name, m) in [("drift", &drift), ("diffusion", &diffusion), ("vacuum_diffusion", &vacuum_diffusion)] {
            if m.shape() != (n, n) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("expected {n}x{n}, got {:?}", m.shape()),
                });
            }
        }
        for op in &basis {
            if !basis.contains(&op.partner()) {
                return Err(Error::InvalidParameter {
                    name: "basis",
                    reason: format!("{op} present without its conjugate partner"),
                });
            }
        }
        Ok(Self { basis, drift, diffusion, vacuum_diffusion, populations })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, op: Operator) -> Option<usize> {
        self.basis.iter().position(|&b| b == op)
    }

    pub fn scales(&self) -> Vec<f64> {
        self.basis.iter().map(|&op| self.populations.scale(op)).collect()
    }

    /// Drift in units where every operator has unit fluctuation scale.
    pub fn scaled_drift(&self) -> CMatrix {
        linalg::scale_drift(&self.drift, &self.scales())
    }

    pub fn scaled_diffusion(&self) -> CMatrix {
        linalg::scale_noise(&self.diffusion, &self.scales())
    }

    /// Matrix of steady commutators `[α, β]` over the basis.
    pub fn commutator_matrix(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(self.populations.commutator(self.basis[i], self.basis[j]), 0.0)
        })
    }

    /// Same drift, vacuum input field.
    pub fn with_vacuum_input(&self) -> Self {
        Self { diffusion: self.vacuum_diffusion.clone(), ..self.clone() }
    }

    /// Single lossy cavity mode driven through its input port.
    pub fn field_only(kappa: f64, delta_cavity: f64, input: InputFieldStats) -> Result<Self> {
        crate::error::require_positive("kappa", kappa)?;
        let drift = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(-kappa, -delta_cavity),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-kappa, delta_cavity),
            ],
        );
        let mut diffusion = CMatrix::zeros(2, 2);
        fill_field_diffusion(&mut diffusion, 0, 1, kappa, input);
        let mut vacuum = CMatrix::zeros(2, 2);
        fill_field_diffusion(&mut vacuum, 0, 1, kappa, InputFieldStats::vacuum());
        Self::new(
            vec![Operator::A, Operator::ADag],
            drift,
            diffusion,
            vacuum,
            Populations { n_meta: 1.0, n_ground: 1.0 },
        )
    }
}

/// Which Langevin forces to include in the diffusion matrix. Dropping the
/// exchange forces is only useful as a negative control: the model then
/// violates the commutation relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseModel {
    pub exchange_noise: bool,
    /// Force accompanying the `gamma_0` wall damping of the metastable
    /// coherence (Einstein relation, `2 n γ0` on `D_{21,12}`).
    pub wall_noise: bool,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { exchange_noise: true, wall_noise: true }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Drift matrix of the 8-operator model.
pub fn build_full_drift(params: &PhysicalParams) -> Result<CMatrix> {
    params.validate()?;
    use Operator::*;
    let idx = |op: Operator| op as usize;
    let p = params;
    let mut a = CMatrix::zeros(8, 8);

    // Rows for the annihilation-like operators; the partner rows follow by
    // conjugation.
    a[(idx(S21), idx(S21))] = c(-(p.gamma_m + p.gamma_0), p.delta_meta);
    a[(idx(S21), idx(I09))] = c(p.gamma_f, 0.0);
    a[(idx(S21), idx(S23))] = c(0.0, -p.omega_rabi);

    a[(idx(S23), idx(S23))] = c(-p.gamma, -p.delta_one_photon);
    a[(idx(S23), idx(S21))] = c(0.0, -p.omega_rabi);
    a[(idx(S23), idx(A))] = c(0.0, -p.g_coupling * p.n_meta);

    a[(idx(I09), idx(I09))] = c(-p.gamma_f, p.delta_ground);
    a[(idx(I09), idx(S21))] = c(p.gamma_m, 0.0);

    a[(idx(A), idx(A))] = c(-p.kappa, -p.delta_cavity);
    a[(idx(A), idx(S23))] = c(0.0, -p.g_coupling);

    for row in [S21, S23, I09, A] {
        for col in Operator::FULL_BASIS {
            let v = a[(idx(row), idx(col))];
            a[(idx(row.partner()), idx(col.partner()))] = v.conj();
        }
    }
    Ok(a)
}

fn fill_field_diffusion(d: &mut CMatrix, a: usize, a_dag: usize, kappa: f64, input: InputFieldStats) {
    let two_kappa = 2.0 * kappa;
    d[(a, a_dag)] = c(two_kappa * (input.n_therm + 1.0), 0.0);
    d[(a_dag, a)] = c(two_kappa * input.n_therm, 0.0);
    d[(a, a)] = c(two_kappa * input.m_anom, 0.0);
    d[(a_dag, a_dag)] = c(two_kappa * input.m_anom, 0.0);
}

/// Diffusion matrix of the 8-operator model with every force included.
pub fn build_full_diffusion(params: &PhysicalParams, input: InputFieldStats) -> Result<CMatrix> {
    build_full_diffusion_with(params, input, NoiseModel::default())
}

pub fn build_full_diffusion_with(
    params: &PhysicalParams,
    input: InputFieldStats,
    noise: NoiseModel,
) -> Result<CMatrix> {
    params.validate()?;
    use Operator::*;
    let idx = |op: Operator| op as usize;
    let n = params.n_meta;
    let exch = 2.0 * n * params.gamma_m;
    let mut d = CMatrix::zeros(8, 8);

    if noise.exchange_noise {
        d[(idx(S21), idx(S12))] = c(exch, 0.0);
        d[(idx(I09), idx(I90))] = c(exch, 0.0);
        d[(idx(S21), idx(I90))] = c(-exch, 0.0);
        d[(idx(I09), idx(S12))] = c(-exch, 0.0);
    }
    if noise.wall_noise {
        d[(idx(S21), idx(S12))] += c(2.0 * n * params.gamma_0, 0.0);
    }
    d[(idx(S23), idx(S32))] = c(2.0 * n * params.gamma, 0.0);
    fill_field_diffusion(&mut d, idx(A), idx(ADag), params.kappa, input);
    Ok(d)
}

/// Full 8-operator system for `params`, with its own squeezed input.
pub fn build_full_system(params: &PhysicalParams) -> Result<LangevinSystem> {
    build_full_system_with(params, NoiseModel::default())
}

pub fn build_full_system_with(params: &PhysicalParams, noise: NoiseModel) -> Result<LangevinSystem> {
    let drift = build_full_drift(params)?;
    let diffusion = build_full_diffusion_with(params, params.input_stats(), noise)?;
    let vacuum = build_full_diffusion_with(params, InputFieldStats::vacuum(), noise)?;
    LangevinSystem::new(
        Operator::FULL_BASIS.to_vec(),
        drift,
        diffusion,
        vacuum,
        Populations { n_meta: params.n_meta, n_ground: params.n_ground },
    )
}

/// Spectral summary of the drift matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    /// `max Re(λ)`; negative means stable.
    pub margin: f64,
    /// `max |Re(λ)|`, the fastest relaxation rate.
    pub max_decay: f64,
    /// `min |Re(λ)|`, the slowest relaxation rate.
    pub min_decay: f64,
    /// `max |λ|`.
    pub max_modulus: f64,
}

/// Relative margin below zero required before a steady state is trusted.
pub const STABILITY_REL_TOL: f64 = 1e-12;

impl Stability {
    pub fn threshold(&self) -> f64 {
        -STABILITY_REL_TOL * self.max_decay
    }

    pub fn is_stable(&self) -> bool {
        self.margin < self.threshold()
    }

    pub fn require_stable(&self) -> Result<()> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(Error::UnstableSystem { margin: self.margin, threshold: self.threshold() })
        }
    }
}

pub fn check_stability(system: &LangevinSystem) -> Result<Stability> {
    let ev = linalg::eigenvalues(&system.scaled_drift()).ok_or(Error::EigenSolver)?;
    stability_from_eigenvalues(&ev)
}

pub(crate) fn stability_from_eigenvalues(ev: &[Complex64]) -> Result<Stability> {
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenSolver);
    }
    let margin = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let max_decay = ev.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let min_decay = ev.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    let max_modulus = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(Stability { margin, max_decay, min_decay, max_modulus })
}
