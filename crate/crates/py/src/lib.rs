//! Python bindings: parameters, the steady-state solve, closed forms, the
//! helium operating point, sweeps and the invariant suite.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spinmem::analytic;
use spinmem::engine::{self, MomentMatrix};
use spinmem::experiments::{self, ExperimentConfig, InvariantConfig, SweepKind, SweepSpec};
use spinmem::helium;

fn value_error(e: spinmem::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

const FIELDS: [&str; 14] = [
    "gamma", "kappa", "gamma_m", "gamma_f", "gamma_0", "omega_rabi", "delta_one_photon", "delta_meta",
    "delta_ground", "delta_cavity", "g_coupling", "n_meta", "n_ground", "r_squeeze",
];

/// Rates, detunings, populations and input squeezing of one configuration.
/// Read-only; build a new object to change a value.
#[pyclass(name = "PhysicalParams", frozen)]
struct PyParams {
    inner: spinmem::PhysicalParams,
}

impl PyParams {
    fn values(&self) -> [f64; 14] {
        let p = &self.inner;
        [
            p.gamma, p.kappa, p.gamma_m, p.gamma_f, p.gamma_0, p.omega_rabi, p.delta_one_photon, p.delta_meta,
            p.delta_ground, p.delta_cavity, p.g_coupling, p.n_meta, p.n_ground, p.r_squeeze,
        ]
    }
}

#[pymethods]
impl PyParams {
    /// Explicit parameters; `gamma_f` defaults to exchange balance.
    #[new]
    #[pyo3(signature = (
        *, gamma, kappa, gamma_m, n_meta, n_ground, delta_one_photon, gamma_f=None, gamma_0=0.0, omega_rabi=0.0,
        delta_meta=0.0, delta_ground=0.0, delta_cavity=0.0, g_coupling=0.0, r_squeeze=0.0
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        gamma: f64,
        kappa: f64,
        gamma_m: f64,
        n_meta: f64,
        n_ground: f64,
        delta_one_photon: f64,
        gamma_f: Option<f64>,
        gamma_0: f64,
        omega_rabi: f64,
        delta_meta: f64,
        delta_ground: f64,
        delta_cavity: f64,
        g_coupling: f64,
        r_squeeze: f64,
    ) -> PyResult<Self> {
        let inner = spinmem::PhysicalParams {
            gamma,
            kappa,
            gamma_m,
            gamma_f: gamma_f.unwrap_or_else(|| spinmem::PhysicalParams::balanced_gamma_f(gamma_m, n_meta, n_ground)),
            gamma_0,
            omega_rabi,
            delta_one_photon,
            delta_meta,
            delta_ground,
            delta_cavity,
            g_coupling,
            n_meta,
            n_ground,
            r_squeeze,
        };
        inner.validate().map_err(value_error)?;
        Ok(Self { inner })
    }

    /// Reference helium setup at `Γ/γm = gamma_ratio`, matched resonances
    /// shifted by the relative field error `db_over_b`.
    #[staticmethod]
    #[pyo3(signature = (gamma_ratio=0.1, db_over_b=0.0, x_variance=0.5, gamma_0=0.0))]
    fn reference(gamma_ratio: f64, db_over_b: f64, x_variance: f64, gamma_0: f64) -> PyResult<Self> {
        let cfg = ExperimentConfig::default();
        let r = spinmem::InputFieldStats::r_for_x_variance(x_variance);
        let (inner, _) = cfg.engine_params(gamma_ratio, db_over_b, r, gamma_0).map_err(value_error)?;
        Ok(Self { inner })
    }

    /// Cooperativity, pump rate, memory bandwidth and light shift.
    #[pyo3(signature = (level_factor=1.0))]
    fn derived<'py>(&self, py: Python<'py>, level_factor: f64) -> PyResult<Bound<'py, PyDict>> {
        let d = analytic::DerivedParams::from_params(&self.inner, level_factor).map_err(value_error)?;
        let out = PyDict::new(py);
        out.set_item("cooperativity", d.cooperativity)?;
        out.set_item("pump_rate", d.pump_rate)?;
        out.set_item("memory_bandwidth", d.memory_bandwidth)?;
        out.set_item("light_shift", d.light_shift)?;
        out.set_item("two_photon_detuning_tilde", d.two_photon_detuning_tilde)?;
        Ok(out)
    }

    fn __getattr__(&self, name: &str) -> PyResult<f64> {
        FIELDS
            .iter()
            .position(|f| *f == name)
            .map(|i| self.values()[i])
            .ok_or_else(|| pyo3::exceptions::PyAttributeError::new_err(name.to_string()))
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = PyDict::new(py);
        for (k, v) in FIELDS.iter().zip(self.values()) {
            out.set_item(k, v)?;
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Steady-state second moments of the full model.
#[pyclass(name = "Moments")]
struct PyMoments {
    inner: MomentMatrix,
}

#[pymethods]
impl PyMoments {
    fn labels(&self) -> Vec<String> {
        self.inner.basis.iter().map(|op| op.label().to_string()).collect()
    }

    /// `M[i][j] = <δα_i δα_j>` as nested lists of complex numbers.
    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let m = &self.inner.moments;
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
    }

    /// Relative commutator errors for (metastable, ground, field).
    fn commutator_errors(&self) -> (f64, f64, f64) {
        let [a, b, c] = self.inner.commutator_errors();
        (a, b, c)
    }

    /// Normalized quadrature variances.
    fn variances<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let v = engine::quadrature_variances(&self.inner);
        let out = PyDict::new(py);
        for (k, x) in [
            ("var_i_x", v.var_i_x),
            ("var_i_y", v.var_i_y),
            ("var_s_x", v.var_s_x),
            ("var_s_y", v.var_s_y),
            ("var_x", v.var_x),
            ("var_y", v.var_y),
            ("best_var_i", v.best_var_i),
            ("best_angle_i", v.best_angle_i),
        ] {
            out.set_item(k, x)?;
        }
        Ok(out)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }
}

/// Solves the steady state of the full model for `params`.
#[pyfunction]
fn solve(params: PyRef<'_, PyParams>) -> PyResult<PyMoments> {
    let system = spinmem::build_full_system(&params.inner).map_err(value_error)?;
    let inner = engine::solve_steady_moments(&system).map_err(value_error)?;
    Ok(PyMoments { inner })
}

/// Closed-form `(var_I_y, var_S_y)`.
#[pyfunction]
fn analytic_variances(gamma_pump: f64, gamma_m: f64, cooperativity: f64, r: f64) -> (f64, f64) {
    let v = analytic::analytic_variances(gamma_pump, gamma_m, cooperativity, r);
    (v.var_i_y, v.var_s_y)
}

#[pyfunction]
#[pyo3(signature = (omega_rabi, delta_one_photon, gamma, cooperativity, level_factor=1.0))]
fn pump_rate(omega_rabi: f64, delta_one_photon: f64, gamma: f64, cooperativity: f64, level_factor: f64) -> PyResult<f64> {
    analytic::pump_rate(omega_rabi, delta_one_photon, gamma, cooperativity, level_factor).map_err(value_error)
}

/// `(rate, time)` of the ground-state response.
#[pyfunction]
fn memory_bandwidth(gamma_f: f64, gamma_m: f64, gamma_pump: f64) -> (f64, f64) {
    let b = analytic::memory_bandwidth(gamma_f, gamma_m, gamma_pump);
    (b.rate, b.time)
}

/// Matched field (gauss) and frequencies (rad/s).
#[pyfunction]
fn operating_point<'py>(py: Python<'py>, omega_rabi: f64, delta_one_photon: f64) -> PyResult<Bound<'py, PyDict>> {
    let op = helium::match_operating_point(omega_rabi, delta_one_photon).map_err(value_error)?;
    let out = PyDict::new(py);
    out.set_item("field_gauss", op.field_gauss)?;
    out.set_item("delta_las", op.delta_las)?;
    out.set_item("light_shift", op.light_shift)?;
    out.set_item("omega_i", op.omega_i)?;
    out.set_item("omega_s", op.omega_s)?;
    Ok(out)
}

/// Text report for the reference cell at `Γ/γm = pump_ratio`.
#[pyfunction]
#[pyo3(signature = (pump_ratio=0.1, db_over_b=1e-4))]
fn operating_point_report(pump_ratio: f64, db_over_b: f64) -> PyResult<String> {
    let cfg = ExperimentConfig { pump_ratio, ..ExperimentConfig::default() };
    experiments::run_operating_point_report(&cfg, db_over_b).map(|r| r.to_string()).map_err(value_error)
}

/// CSV of the `Γ/γm` sweep. `gamma_0=None` uses the pressure law.
#[pyfunction]
#[pyo3(signature = (points=61, gamma_0=None, x_variance=0.5))]
fn gamma_sweep(points: usize, gamma_0: Option<f64>, x_variance: f64) -> PyResult<String> {
    let cfg = ExperimentConfig { gamma_0, x_variance, ..ExperimentConfig::default() };
    let mut spec = SweepSpec::new(SweepKind::GammaRatio);
    spec.grid.points = points;
    experiments::run_gamma_sweep(&cfg, &spec).map(|rows| experiments::rows_to_csv(&rows)).map_err(value_error)
}

/// CSV of the field-error sweep, one curve per entry of `db_over_b`.
#[pyfunction]
#[pyo3(signature = (points=61, db_over_b=None))]
fn field_error_sweep(points: usize, db_over_b: Option<Vec<f64>>) -> PyResult<String> {
    let cfg = ExperimentConfig::default();
    let mut spec = SweepSpec::new(SweepKind::FieldError);
    spec.grid.points = points;
    if let Some(list) = db_over_b {
        spec.db_over_b = list;
    }
    experiments::run_field_error_sweep(&cfg, &spec).map(|rows| experiments::rows_to_csv(&rows)).map_err(value_error)
}

/// `(passed, report)` of the randomized invariant suite.
#[pyfunction]
#[pyo3(signature = (seed=1, draws=50, parseval_draws=10))]
fn invariants(py: Python<'_>, seed: u64, draws: usize, parseval_draws: usize) -> PyResult<(bool, String)> {
    let cfg = InvariantConfig { draws, parseval_draws, ..InvariantConfig::default() };
    let report = py.detach(|| experiments::run_invariant_suite(&cfg, seed)).map_err(value_error)?;
    Ok((report.passes(), report.to_string()))
}

#[pymodule]
fn pyspinmem(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyMoments>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_variances, m)?)?;
    m.add_function(wrap_pyfunction!(pump_rate, m)?)?;
    m.add_function(wrap_pyfunction!(memory_bandwidth, m)?)?;
    m.add_function(wrap_pyfunction!(operating_point, m)?)?;
    m.add_function(wrap_pyfunction!(operating_point_report, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(field_error_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(invariants, m)?)?;
    Ok(())
}
