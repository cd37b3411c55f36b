//! Python bindings for the goodput simulator.

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyInt, PyString};

use goodput_core::beamform::{BeamformDesign, MaxMinProblem, DEFAULT_GAMMA_TOL};
use goodput_core::channel::{self, Scenario as CoreScenario, ScenarioConfig as CoreConfig};
use goodput_core::experiment::{self, Preset};
use goodput_core::goodput as gp;
use goodput_core::quadform::{self, FittedForm, RealQuadraticForm, DEFAULT_DEGREE};

fn to_py(e: goodput_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("matrix rows must have equal length"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn kwargs_to_config(base: CoreConfig, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<CoreConfig> {
    let Some(kwargs) = kwargs else {
        return Ok(base);
    };
    let mut table = toml::Table::try_from(&base).map_err(|e| PyValueError::new_err(e.to_string()))?;
    for (k, v) in kwargs.iter() {
        let key: String = k.extract()?;
        let value = if v.is_instance_of::<PyBool>() {
            toml::Value::Boolean(v.extract()?)
        } else if v.is_instance_of::<PyInt>() {
            toml::Value::Integer(v.extract()?)
        } else if v.is_instance_of::<PyFloat>() {
            toml::Value::Float(v.extract()?)
        } else if v.is_instance_of::<PyString>() {
            toml::Value::String(v.extract()?)
        } else {
            return Err(PyValueError::new_err(format!("unsupported value for `{key}`")));
        };
        table.insert(key, value);
    }
    let cfg: CoreConfig = table.try_into().map_err(|e: toml::de::Error| PyValueError::new_err(e.to_string()))?;
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

/// Scenario settings; keyword arguments override the defaults.
#[pyclass(name = "ScenarioConfig", from_py_object)]
#[derive(Clone)]
struct PyScenarioConfig {
    inner: CoreConfig,
}

#[pymethods]
impl PyScenarioConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        Ok(Self {
            inner: kwargs_to_config(CoreConfig::default(), kwargs)?,
        })
    }

    fn to_toml(&self) -> PyResult<String> {
        toml::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn n_antennas(&self) -> usize {
        self.inner.n_antennas
    }

    #[getter]
    fn n_users(&self) -> usize {
        self.inner.n_users
    }

    #[getter]
    fn multicell(&self) -> bool {
        self.inner.multicell
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn __repr__(&self) -> String {
        format!("ScenarioConfig({:?})", self.inner)
    }
}

#[pyclass(name = "Scenario", skip_from_py_object)]
struct PyScenario {
    inner: CoreScenario,
}

impl PyScenario {
    fn check_user(&self, user: usize) -> PyResult<()> {
        if user >= self.inner.n_users() {
            return Err(PyIndexError::new_err(format!("user {user} out of range")));
        }
        Ok(())
    }
}

#[pymethods]
impl PyScenario {
    #[getter]
    fn n_users(&self) -> usize {
        self.inner.n_users()
    }

    #[getter]
    fn n_antennas(&self) -> usize {
        self.inner.n_antennas()
    }

    #[getter]
    fn noise(&self) -> Vec<f64> {
        self.inner.noise.clone()
    }

    #[getter]
    fn large_scale_gain(&self) -> Vec<f64> {
        self.inner.large_scale_gain.clone()
    }

    #[getter]
    fn positions(&self) -> Vec<(f64, f64)> {
        self.inner.positions.clone()
    }

    #[getter]
    fn total_power(&self) -> f64 {
        self.inner.total_power
    }

    fn h_est(&self, user: usize) -> PyResult<Vec<Complex64>> {
        self.check_user(user)?;
        Ok(self.inner.h_est[user].iter().copied().collect())
    }

    fn h_true(&self, user: usize) -> PyResult<Vec<Complex64>> {
        self.check_user(user)?;
        Ok(self.inner.h_true[user].iter().copied().collect())
    }

    fn err_power(&self, user: usize) -> PyResult<f64> {
        self.check_user(user)?;
        Ok(self.inner.err_power(user))
    }

    /// Error draws for one user, each a list of complex entries.
    fn sample_errors(&self, user: usize, count: usize, seed: u64) -> PyResult<Vec<Vec<Complex64>>> {
        self.check_user(user)?;
        Ok(channel::sample_errors(&self.inner, user, count, seed)
            .into_iter()
            .map(|e| e.iter().copied().collect())
            .collect())
    }
}

#[pyclass(name = "Design", skip_from_py_object)]
struct PyDesign {
    inner: BeamformDesign,
}

#[pymethods]
impl PyDesign {
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    #[getter]
    fn rate(&self) -> f64 {
        gp::rate_from_gamma(self.inner.gamma())
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a()
    }

    #[getter]
    fn powers(&self) -> Vec<f64> {
        self.inner.powers().to_vec()
    }

    fn directions(&self) -> Vec<Vec<Complex64>> {
        self.inner
            .directions()
            .iter()
            .map(|u| u.iter().copied().collect())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Design(a={}, gamma={:.6e}, rate={:.4})",
            self.inner.a(),
            self.inner.gamma(),
            gp::rate_from_gamma(self.inner.gamma())
        )
    }
}

/// Fitted distribution of a positive quadratic form.
#[pyclass(name = "QuadraticFormFit", skip_from_py_object)]
struct PyFit {
    inner: FittedForm,
}

#[pymethods]
impl PyFit {
    fn cdf(&self, y: f64) -> f64 {
        self.inner.cdf(y)
    }

    /// Density, or `None` for a point mass.
    fn density(&self, y: f64) -> PyResult<Option<f64>> {
        match &self.inner {
            FittedForm::Laguerre(p) => p.density(y).map(Some).map_err(to_py),
            FittedForm::PointMass(_) => Ok(None),
        }
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    #[getter]
    fn std_dev(&self) -> f64 {
        self.inner.std_dev()
    }

    /// Shape and scale of the gamma base, `None` for a point mass.
    #[getter]
    fn gamma_base(&self) -> Option<(f64, f64)> {
        match &self.inner {
            FittedForm::Laguerre(p) => Some((p.nu(), p.beta())),
            FittedForm::PointMass(_) => None,
        }
    }

    /// Series coefficients in the monomial basis.
    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        match &self.inner {
            FittedForm::Laguerre(p) => p.xi().to_vec(),
            FittedForm::PointMass(_) => Vec::new(),
        }
    }
}

#[pyfunction]
#[pyo3(signature = (config = None, **kwargs))]
fn generate_scenario(config: Option<PyScenarioConfig>, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<PyScenario> {
    let base = config.map(|c| c.inner).unwrap_or_default();
    let cfg = kwargs_to_config(base, kwargs)?;
    Ok(PyScenario {
        inner: channel::generate(&cfg).map_err(to_py)?,
    })
}

/// Zero-forcing design with robust max-min powers for scale factor `a`.
#[pyfunction]
#[pyo3(signature = (scenario, a = 0.0, tol = DEFAULT_GAMMA_TOL))]
fn design(scenario: &PyScenario, a: f64, tol: f64) -> PyResult<PyDesign> {
    Ok(PyDesign {
        inner: gp::design_for(&scenario.inner, a, tol).map_err(to_py)?,
    })
}

#[pyfunction]
#[pyo3(signature = (gains, noise, err_power, total_power, a = 0.0, tol = DEFAULT_GAMMA_TOL))]
fn maxmin_gamma(
    gains: Vec<f64>,
    noise: Vec<f64>,
    err_power: Vec<f64>,
    total_power: f64,
    a: f64,
    tol: f64,
) -> PyResult<(f64, Vec<f64>)> {
    MaxMinProblem::new(gains, noise, err_power, total_power)
        .and_then(|p| p.maxmin_gamma(a, tol))
        .map_err(to_py)
}

/// Per-user outage probabilities of a design transmitted at `rate`.
#[pyfunction]
#[pyo3(signature = (scenario, design, rate, degree = DEFAULT_DEGREE))]
fn outage_probabilities(scenario: &PyScenario, design: &PyDesign, rate: f64, degree: usize) -> PyResult<Vec<f64>> {
    gp::alg1_outages(&scenario.inner, &design.inner, gp::gamma_from_rate(rate), degree).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (rate, outage, eta = gp::DEFAULT_ETA))]
fn goodput(rate: f64, outage: Vec<f64>, eta: f64) -> f64 {
    gp::goodput(rate, &outage, eta)
}

/// `(rate, goodput, outages)` per rate; failed points are `None`.
#[pyfunction]
#[pyo3(signature = (scenario, design, rates, eta = gp::DEFAULT_ETA, degree = DEFAULT_DEGREE))]
fn sweep_rate(
    scenario: &PyScenario,
    design: &PyDesign,
    rates: Vec<f64>,
    eta: f64,
    degree: usize,
) -> Vec<Option<(f64, f64, Vec<f64>)>> {
    gp::sweep_rate(&scenario.inner, &design.inner, &rates, eta, degree)
        .into_iter()
        .map(|p| p.ok().map(|p| (p.rate, p.goodput_per_user, p.outage)))
        .collect()
}

#[pyfunction]
#[pyo3(signature = (scenario, design, rates, eta = gp::DEFAULT_ETA, n_samples = 2000, seed = 0))]
fn mc_goodput(
    scenario: &PyScenario,
    design: &PyDesign,
    rates: Vec<f64>,
    eta: f64,
    n_samples: usize,
    seed: u64,
) -> PyResult<Vec<(f64, f64, Vec<f64>)>> {
    Ok(gp::mc_goodput(&scenario.inner, &design.inner, &rates, eta, n_samples, seed)
        .map_err(to_py)?
        .into_iter()
        .map(|p| (p.rate, p.goodput_per_user, p.outage))
        .collect())
}

/// `(a, gamma, predicted goodput, at_boundary)`.
#[pyfunction]
#[pyo3(signature = (scenario, eta = gp::DEFAULT_ETA, a_lo = 0.0, a_hi = 50.0, tol = 1e-3))]
fn choose_a(scenario: &PyScenario, eta: f64, a_lo: f64, a_hi: f64, tol: f64) -> PyResult<(f64, f64, f64, bool)> {
    let c = gp::choose_a(&scenario.inner, eta, (a_lo, a_hi), tol).map_err(to_py)?;
    Ok((c.a, c.gamma, c.goodput, c.at_boundary))
}

/// Fits `x^T A x` for `x ~ N(mean, cov)` with a degree-`degree` series.
#[pyfunction]
#[pyo3(signature = (matrix_a, mean, cov, degree = DEFAULT_DEGREE))]
fn fit_quadratic_form(
    matrix_a: Vec<Vec<f64>>,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
    degree: usize,
) -> PyResult<PyFit> {
    let form = RealQuadraticForm::new(matrix(matrix_a)?, DVector::from_vec(mean), matrix(cov)?).map_err(to_py)?;
    Ok(PyFit {
        inner: quadform::fit_form(&form, degree).map_err(to_py)?,
    })
}

/// Runs an experiment config; returns the CSV and metadata paths.
#[pyfunction]
#[pyo3(signature = (config, preset = None, seed = None, out = None, jobs = None))]
fn run_experiment(
    config: PathBuf,
    preset: Option<&str>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
) -> PyResult<(String, String)> {
    let mut spec = experiment::parse_config(&config).map_err(to_py)?;
    if let Some(p) = preset {
        spec.preset = match p {
            "fig1" => Preset::Fig1,
            "fig2" => Preset::Fig2,
            "fig3" => Preset::Fig3,
            "table1" => Preset::Table1,
            "custom" => Preset::Custom,
            other => return Err(PyValueError::new_err(format!("unknown preset `{other}`"))),
        };
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(o) = out {
        spec.output_path = o;
    }
    let res = experiment::run(&spec, jobs).map_err(to_py)?;
    Ok((
        res.csv_path.display().to_string(),
        res.meta_path.display().to_string(),
    ))
}

#[pymodule(name = "goodput")]
fn goodput_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenarioConfig>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyDesign>()?;
    m.add_class::<PyFit>()?;
    m.add_function(wrap_pyfunction!(generate_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(design, m)?)?;
    m.add_function(wrap_pyfunction!(maxmin_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(outage_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(goodput, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_rate, m)?)?;
    m.add_function(wrap_pyfunction!(mc_goodput, m)?)?;
    m.add_function(wrap_pyfunction!(choose_a, m)?)?;
    m.add_function(wrap_pyfunction!(fit_quadratic_form, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
