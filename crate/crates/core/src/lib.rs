//! Squeezed-light storage in a metastable/ground-state spin pair coupled by
//! metastability exchange: linearized quantum Langevin model, steady-state
//! moments, noise spectra, adiabatic closed forms and helium-3 bookkeeping.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod helium;
pub mod linalg;
pub mod model;
pub mod params;

pub use error::{Error, Result};
pub use model::{build_full_system, build_full_system_with, LangevinSystem, NoiseModel, Operator};
pub use params::{InputFieldStats, PhysicalParams};
