//! Steady-state moments, quadrature variances and noise spectra of a
//! [`LangevinSystem`](crate::model::LangevinSystem).

mod integrate;
mod quadrature;
mod spectrum;
mod steady;

pub use integrate::{integrate_moments, integrate_moments_from, integration_schedule, Schedule};
pub use quadrature::{best_quadrature, quadrature_variances, BestQuadrature, QuadratureCov, Species, VarianceReport};
pub use spectrum::{integrate_spectrum, noise_spectrum, normalized_spectral_variance, spectrum_halfwidth, Quadrature};
pub use steady::{solve_steady_moments, MomentMatrix, STEADY_RESIDUAL_TOL};
