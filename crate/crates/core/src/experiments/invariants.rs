use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::{
    integrate_moments, integrate_spectrum, integration_schedule, quadrature_variances, solve_steady_moments,
    MomentMatrix,
};
use crate::error::{Error, Result};
use crate::model::{build_full_system, build_full_system_with, check_stability, NoiseModel};
use crate::params::PhysicalParams;

/// Draws are rejected above this `max|λ| / min|Re λ|`, which bounds the
/// number of RK4 steps in the oracle comparison.
pub const MAX_STIFFNESS: f64 = 400.0;
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantConfig {
    pub draws: usize,
    /// The first `parseval_draws` draws also get the spectral check.
    pub parseval_draws: usize,
    pub commutator_tol: f64,
    pub heisenberg_tol: f64,
    pub oracle_tol: f64,
    pub parseval_tol: f64,
}

impl Default for InvariantConfig {
    fn default() -> Self {
        Self {
            draws: 50,
            parseval_draws: 10,
            commutator_tol: 1e-8,
            heisenberg_tol: 1e-9,
            oracle_tol: 1e-6,
            parseval_tol: 1e-4,
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random desk-scale configuration (rates in units of γ = 1) that is stable
/// and not too stiff for the time-domain oracle.
pub fn random_stable_params(rng: &mut ChaCha8Rng) -> Result<PhysicalParams> {
    for _ in 0..MAX_ATTEMPTS {
        let kappa = log_uniform(rng, 0.5, 5.0);
        let gamma_m = log_uniform(rng, 0.05, 0.5);
        let n_meta = log_uniform(rng, 10.0, 1e4);
        let n_ground = n_meta * log_uniform(rng, 1.5, 10.0);
        let delta_one_photon = log_uniform(rng, 2.0, 10.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let c = log_uniform(rng, 0.5, 20.0);
        let p = PhysicalParams {
            gamma: 1.0,
            kappa,
            gamma_m,
            gamma_f: PhysicalParams::balanced_gamma_f(gamma_m, n_meta, n_ground),
            gamma_0: rng.random_range(0.0..0.1),
            omega_rabi: log_uniform(rng, 0.2, 2.0),
            delta_one_photon,
            delta_meta: rng.random_range(-0.1..0.1),
            delta_ground: rng.random_range(-0.05..0.05),
            delta_cavity: rng.random_range(-0.5..0.5),
            g_coupling: (c * kappa / n_meta).sqrt(),
            n_meta,
            n_ground,
            r_squeeze: rng.random_range(0.0..1.0),
        };
        let Ok(system) = build_full_system(&p) else { continue };
        let Ok(stab) = check_stability(&system) else { continue };
        if stab.is_stable() && stab.max_modulus / stab.min_decay <= MAX_STIFFNESS {
            return Ok(p);
        }
    }
    Err(Error::InvalidParameter {
        name: "seed",
        reason: format!("no stable configuration within {MAX_ATTEMPTS} attempts"),
    })
}

/// Worst observed value of one check over all draws.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub name: &'static str,
    pub tolerance: f64,
    /// Largest error, or smallest product for the Heisenberg bound.
    pub worst: f64,
    pub samples: usize,
    pub failures: usize,
}

impl CheckSummary {
    /// A check with no samples (e.g. zero Parseval draws) is skipped, not failed.
    pub fn passes(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for CheckSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.samples == 0 {
            return write!(f, "SKIP {:<20}", self.name);
        }
        write!(
            f,
            "{:<4} {:<20} worst {:.3e}  tol {:.1e}  failures {}/{}",
            if self.passes() { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance,
            self.failures,
            self.samples
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub seed: u64,
    pub checks: Vec<CheckSummary>,
    /// Commutator check with the exchange forces removed; "passes" means every
    /// draw was caught.
    pub negative_control: CheckSummary,
}

impl InvariantReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(CheckSummary::passes) && self.negative_control.passes()
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}", self.seed)?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        writeln!(f, "{}", self.negative_control)?;
        write!(f, "{}", if self.passes() { "all invariants hold" } else { "invariant violations found" })
    }
}

struct DrawOutcome {
    commutator: f64,
    heisenberg: f64,
    oracle: f64,
    parseval: Option<f64>,
    control: f64,
}

fn max_commutator_error(m: &MomentMatrix) -> f64 {
    m.commutator_errors().into_iter().fold(0.0, f64::max)
}

fn check_draw(p: &PhysicalParams, with_parseval: bool, cfg: &InvariantConfig) -> Result<DrawOutcome> {
    let system = build_full_system(p)?;
    let steady = solve_steady_moments(&system)?;
    let heisenberg = quadrature_variances(&steady).heisenberg_products().into_iter().fold(f64::INFINITY, f64::min);

    let schedule = integration_schedule(&check_stability(&system)?);
    let integrated = integrate_moments(&system, schedule.t_final, schedule.dt)?;

    let parseval = if with_parseval {
        let spectral = MomentMatrix {
            moments: integrate_spectrum(&system, 0.01 * cfg.parseval_tol)?,
            ..steady.clone()
        };
        Some(spectral.relative_distance(&steady))
    } else {
        None
    };

    let broken = build_full_system_with(p, NoiseModel { exchange_noise: false, ..NoiseModel::default() })?;
    let control = max_commutator_error(&solve_steady_moments(&broken)?);

    Ok(DrawOutcome {
        commutator: max_commutator_error(&steady),
        heisenberg,
        oracle: integrated.relative_distance(&steady),
        parseval,
        control,
    })
}

/// Commutator, Heisenberg, oracle-equivalence and Parseval checks on
/// `cfg.draws` seeded random configurations, plus the negative control.
/// The same seed always produces the same report.
pub fn run_invariant_suite(cfg: &InvariantConfig, seed: u64) -> Result<InvariantReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<PhysicalParams> = (0..cfg.draws).map(|_| random_stable_params(&mut rng)).collect::<Result<_>>()?;
    let outcomes: Vec<Result<DrawOutcome>> =
        draws.par_iter().enumerate().map(|(i, p)| check_draw(p, i < cfg.parseval_draws, cfg)).collect();

    let mut commutator = CheckSummary { name: "commutator", tolerance: cfg.commutator_tol, worst: 0.0, samples: 0, failures: 0 };
    let mut heisenberg = CheckSummary {
        name: "heisenberg",
        tolerance: cfg.heisenberg_tol,
        worst: f64::INFINITY,
        samples: 0,
        failures: 0,
    };
    let mut oracle = CheckSummary { name: "oracle_equivalence", tolerance: cfg.oracle_tol, worst: 0.0, samples: 0, failures: 0 };
    let mut parseval = CheckSummary { name: "parseval", tolerance: cfg.parseval_tol, worst: 0.0, samples: 0, failures: 0 };
    let mut control = CheckSummary {
        name: "negative_control",
        tolerance: cfg.commutator_tol,
        worst: f64::INFINITY,
        samples: 0,
        failures: 0,
    };

    fn record(c: &mut CheckSummary, value: f64, ok: bool, larger_is_worse: bool) {
        c.samples += 1;
        c.worst = if larger_is_worse { c.worst.max(value) } else { c.worst.min(value) };
        if !ok {
            c.failures += 1;
        }
    }

    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(o) => {
                record(&mut commutator, o.commutator, o.commutator <= cfg.commutator_tol, true);
                record(&mut heisenberg, o.heisenberg, o.heisenberg >= 1.0 - cfg.heisenberg_tol, false);
                record(&mut oracle, o.oracle, o.oracle <= cfg.oracle_tol, true);
                if let Some(v) = o.parseval {
                    record(&mut parseval, v, v <= cfg.parseval_tol, true);
                }
                record(&mut control, o.control, o.control > cfg.commutator_tol, false);
            }
            Err(e) => {
                log::warn!("draw {i} failed: {e}");
                for c in [&mut commutator, &mut heisenberg, &mut oracle, &mut control] {
                    record(c, f64::NAN, false, true);
                }
                if i < cfg.parseval_draws {
                    record(&mut parseval, f64::NAN, false, true);
                }
            }
        }
    }

    Ok(InvariantReport { seed, checks: vec![commutator, heisenberg, oracle, parseval], negative_control: control })
}
