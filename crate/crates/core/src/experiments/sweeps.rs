use std::fmt::Write as _;

use rayon::prelude::*;

use crate::analytic::{adiabatic_validity, analytic_regime, analytic_variances};
use crate::engine::{quadrature_variances, solve_steady_moments};
use crate::error::Result;
use crate::model::build_full_system;
use crate::params::InputFieldStats;

use super::config::{ExperimentConfig, SweepKind, SweepSpec};
use super::fmt_sci;

/// One engine evaluation: where to look in parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSpec {
    pub gamma_ratio: f64,
    pub db_over_b: f64,
    pub x_variance: f64,
    pub gamma_0: f64,
}

/// Analytic and numeric results at one grid point. Engine columns are NaN
/// and `status` carries the error when the point could not be solved.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: PointSpec,
    pub pump_rate: f64,
    pub memory_bandwidth: f64,
    pub field_gauss: f64,
    pub delta_las: f64,
    pub analytic_var_i_y: f64,
    pub analytic_var_s_y: f64,
    pub var_i_x: f64,
    pub var_i_y: f64,
    pub var_s_x: f64,
    pub var_s_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub best_var_i: f64,
    pub best_angle_i: f64,
    /// Normalized `var_x · var_y` for ground, metastable and field.
    pub heisenberg: [f64; 3],
    pub adiabatic_valid: bool,
    pub regime_valid: bool,
    pub status: String,
}

impl SweepRow {
    fn failed(point: PointSpec, status: String) -> Self {
        let nan = f64::NAN;
        Self {
            point,
            pump_rate: nan,
            memory_bandwidth: nan,
            field_gauss: nan,
            delta_las: nan,
            analytic_var_i_y: nan,
            analytic_var_s_y: nan,
            var_i_x: nan,
            var_i_y: nan,
            var_s_x: nan,
            var_s_y: nan,
            var_x: nan,
            var_y: nan,
            best_var_i: nan,
            best_angle_i: nan,
            heisenberg: [nan; 3],
            adiabatic_valid: false,
            regime_valid: false,
            status,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn csv_line(&self) -> String {
        let nums = [
            self.point.gamma_ratio,
            self.point.db_over_b,
            self.point.x_variance,
            self.point.gamma_0,
            self.pump_rate,
            self.memory_bandwidth,
            self.field_gauss,
            self.delta_las,
            self.analytic_var_i_y,
            self.analytic_var_s_y,
            self.var_i_x,
            self.var_i_y,
            self.var_s_x,
            self.var_s_y,
            self.var_x,
            self.var_y,
            self.best_var_i,
            self.best_angle_i,
            self.heisenberg[0],
            self.heisenberg[1],
            self.heisenberg[2],
        ];
        let mut line: Vec<String> = nums.iter().map(|&v| fmt_sci(v)).collect();
        line.push(u8::from(self.adiabatic_valid).to_string());
        line.push(u8::from(self.regime_valid).to_string());
        line.push(self.status.replace([',', '\n', '\r'], ";"));
        line.join(",")
    }
}

pub const CSV_HEADER: &str = "gamma_ratio,db_over_b,x_variance,gamma_0,gamma_pump,memory_bandwidth,field_gauss,delta_las,\
analytic_var_i_y,analytic_var_s_y,var_i_x,var_i_y,var_s_x,var_s_y,var_x,var_y,best_var_i,best_angle_i,\
heisenberg_i,heisenberg_s,heisenberg_field,adiabatic_valid,regime_valid,status";

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 400);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

/// Solves the full model at one point. Never fails: problems end up in
/// `status`.
pub fn evaluate_point(cfg: &ExperimentConfig, point: PointSpec) -> SweepRow {
    match try_evaluate(cfg, point) {
        Ok(row) => row,
        Err(e) => {
            log::warn!("point {point:?} failed: {e}");
            SweepRow::failed(point, e.to_string())
        }
    }
}

fn try_evaluate(cfg: &ExperimentConfig, point: PointSpec) -> Result<SweepRow> {
    let r = InputFieldStats::r_for_x_variance(point.x_variance);
    let (params, op) = cfg.engine_params(point.gamma_ratio, point.db_over_b, r, point.gamma_0)?;
    let derived = cfg.derived(&params)?;
    let analytic = analytic_variances(derived.pump_rate, params.gamma_m, derived.cooperativity, r);
    let adiabatic_valid = adiabatic_validity(&params, &derived, cfg.validity_factor).passes();
    let regime_valid = analytic_regime(&params, &derived, cfg.validity_factor).passes();

    let mut row = SweepRow::failed(point, String::new());
    row.pump_rate = derived.pump_rate;
    row.memory_bandwidth = derived.memory_bandwidth;
    row.field_gauss = op.field_gauss;
    row.delta_las = op.delta_las;
    row.analytic_var_i_y = analytic.var_i_y;
    row.analytic_var_s_y = analytic.var_s_y;
    row.adiabatic_valid = adiabatic_valid;
    row.regime_valid = regime_valid;

    let solved = build_full_system(&params).and_then(|sys| solve_steady_moments(&sys));
    match solved {
        Ok(moments) => {
            let v = quadrature_variances(&moments);
            row.var_i_x = v.var_i_x;
            row.var_i_y = v.var_i_y;
            row.var_s_x = v.var_s_x;
            row.var_s_y = v.var_s_y;
            row.var_x = v.var_x;
            row.var_y = v.var_y;
            row.best_var_i = v.best_var_i;
            row.best_angle_i = v.best_angle_i;
            row.heisenberg = v.heisenberg_products();
            row.status = "ok".into();
        }
        Err(e) => {
            log::warn!("engine failed at {point:?}: {e}");
            row.status = e.to_string();
        }
    }
    Ok(row)
}

fn evaluate_all(cfg: &ExperimentConfig, points: &[PointSpec]) -> Vec<SweepRow> {
    // `collect` on an indexed parallel iterator keeps input order.
    points.par_iter().map(|&p| evaluate_point(cfg, p)).collect()
}

/// Variances against `Γ/γm`. `γ0` follows the config override or the
/// pressure law.
pub fn run_gamma_sweep(cfg: &ExperimentConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    spec.validate()?;
    let gamma_0 = cfg.gamma_0_or_gas()?;
    let points: Vec<PointSpec> = spec
        .grid
        .values()
        .into_iter()
        .map(|gamma_ratio| PointSpec { gamma_ratio, db_over_b: 0.0, x_variance: cfg.x_variance, gamma_0 })
        .collect();
    Ok(evaluate_all(cfg, &points))
}

/// One `Γ/γm` curve per relative field error, curves in list order.
/// `γ0` is zero unless the config overrides it.
pub fn run_field_error_sweep(cfg: &ExperimentConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    spec.validate()?;
    let gamma_0 = cfg.gamma_0.unwrap_or(0.0);
    let grid = spec.grid.values();
    let points: Vec<PointSpec> = spec
        .db_over_b
        .iter()
        .flat_map(|&db_over_b| {
            grid.iter()
                .map(move |&gamma_ratio| PointSpec { gamma_ratio, db_over_b, x_variance: cfg.x_variance, gamma_0 })
        })
        .collect();
    Ok(evaluate_all(cfg, &points))
}

/// Input `e^{−2r}` at the configured pump ratio.
pub fn run_squeeze_sweep(cfg: &ExperimentConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    spec.validate()?;
    let gamma_0 = cfg.gamma_0_or_gas()?;
    let points: Vec<PointSpec> = spec
        .grid
        .values()
        .into_iter()
        .map(|x_variance| PointSpec { gamma_ratio: cfg.pump_ratio, db_over_b: 0.0, x_variance, gamma_0 })
        .collect();
    Ok(evaluate_all(cfg, &points))
}

pub fn run_sweep(cfg: &ExperimentConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    match spec.kind {
        SweepKind::GammaRatio => run_gamma_sweep(cfg, spec),
        SweepKind::FieldError => run_field_error_sweep(cfg, spec),
        SweepKind::SqueezingInput => run_squeeze_sweep(cfg, spec),
    }
}

/// A gnuplot script plotting the CSV at `csv_path`.
pub fn gnuplot_script(spec: &SweepSpec, csv_path: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set ylabel 'normalized variance'");
    match spec.kind {
        SweepKind::GammaRatio => {
            let _ = writeln!(s, "set logscale x\nset xlabel 'Gamma/gamma_m'");
            let _ = writeln!(
                s,
                "plot '{csv_path}' using 1:9 with lines, '' using 1:10 with lines, \
                 '' using 1:12 with points, '' using 1:14 with points"
            );
        }
        SweepKind::FieldError => {
            let _ = writeln!(s, "set logscale x\nset xlabel 'Gamma/gamma_m'");
            let curves: Vec<String> = (0..spec.db_over_b.len())
                .map(|i| {
                    let src = if i == 0 { format!("'{csv_path}'") } else { "''".to_string() };
                    format!(
                        "{src} every ::{}::{} using 1:17 with lines title 'dB/B = {:e}'",
                        i * spec.grid.points,
                        (i + 1) * spec.grid.points - 1,
                        spec.db_over_b[i]
                    )
                })
                .collect();
            let _ = writeln!(s, "plot {}", curves.join(", "));
        }
        SweepKind::SqueezingInput => {
            let _ = writeln!(s, "set xlabel 'input X variance'");
            let _ = writeln!(s, "plot '{csv_path}' using 3:12 with linespoints, '' using 3:14 with linespoints");
        }
    }
    s
}
