//! Parameter sweeps, the operating-point report and the randomized invariant
//! suite. Everything here is deterministic: rows are computed in parallel but
//! always emitted in grid order.

mod config;
mod invariants;
mod report;
mod sweeps;

pub use config::{ExperimentConfig, Grid, GridKind, SweepKind, SweepSpec, DEFAULT_DB_OVER_B};
pub use invariants::{random_stable_params, run_invariant_suite, CheckSummary, InvariantConfig, InvariantReport};
pub use report::{run_operating_point_report, OperatingPointReport};
pub use sweeps::{
    evaluate_point, gnuplot_script, rows_to_csv, run_field_error_sweep, run_gamma_sweep, run_squeeze_sweep, run_sweep,
    PointSpec, SweepRow, CSV_HEADER,
};

/// Scientific notation with 9 significant digits.
pub(crate) fn fmt_sci(v: f64) -> String {
    format!("{v:.8e}")
}
