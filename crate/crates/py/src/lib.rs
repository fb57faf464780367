//! Python bindings. Invalid input raises `ValueError`, solver and numeric
//! failures raise `RuntimeError`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use d2d::experiments::{optimized_policy, parse_kind};
use d2d::{analytic, numerics, optimizers, scenario, simulator};

fn py_err(e: d2d::Error) -> PyErr {
    match e {
        d2d::Error::Config { .. } | d2d::Error::InvalidArgument(_) | d2d::Error::Domain { .. } | d2d::Error::Io(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Network and workload parameters.
#[pyclass(name = "ScenarioConfig", module = "d2d_caching", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyScenario {
    inner: d2d::ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (intensity, d2d_radius, catalog_size, cache_size, zipf_exponent, window_half_width = 10.0, seed = 0))]
    fn new(
        intensity: f64,
        d2d_radius: f64,
        catalog_size: usize,
        cache_size: usize,
        zipf_exponent: f64,
        window_half_width: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let inner = d2d::ScenarioConfig::new(intensity, d2d_radius, catalog_size, cache_size, zipf_exponent)
            .map_err(py_err)?
            .with_window(window_half_width)
            .with_seed(seed);
        inner.validate().map_err(py_err)?;
        Ok(PyScenario { inner })
    }

    /// Two files with demand (2/3, 1/3), one slot per cache and intensity 1/π.
    #[staticmethod]
    fn two_file_example(d2d_radius: f64) -> Self {
        PyScenario { inner: d2d::ScenarioConfig::two_file_example(d2d_radius) }
    }

    #[staticmethod]
    fn from_file(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(PyScenario { inner: d2d::ScenarioConfig::from_path(path).map_err(py_err)? })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyScenario { inner: text.parse().map_err(py_err)? })
    }

    fn with_seed(&self, seed: u64) -> Self {
        PyScenario { inner: self.inner.clone().with_seed(seed) }
    }

    #[getter]
    fn intensity(&self) -> f64 {
        self.inner.intensity
    }
    #[getter]
    fn d2d_radius(&self) -> f64 {
        self.inner.d2d_radius
    }
    #[getter]
    fn catalog_size(&self) -> usize {
        self.inner.catalog_size
    }
    #[getter]
    fn cache_size(&self) -> usize {
        self.inner.cache_size
    }
    #[getter]
    fn zipf_exponent(&self) -> f64 {
        self.inner.zipf_exponent
    }
    #[getter]
    fn window_half_width(&self) -> f64 {
        self.inner.window_half_width
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    /// Mean number of caches within the D2D radius.
    fn mean_coverage(&self) -> f64 {
        self.inner.mean_coverage()
    }

    fn popularity(&self) -> PyResult<Vec<f64>> {
        Ok(self.inner.popularity().map_err(py_err)?.as_slice().to_vec())
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "ScenarioConfig(intensity={}, d2d_radius={}, catalog_size={}, cache_size={}, zipf_exponent={}, window_half_width={}, seed={})",
            c.intensity, c.d2d_radius, c.catalog_size, c.cache_size, c.zipf_exponent, c.window_half_width, c.seed
        )
    }
}

#[pyclass(name = "GcpSolution", module = "d2d_caching", get_all, frozen)]
pub struct PyGcp {
    marginals: Vec<f64>,
    mu_star: f64,
}

#[pyclass(name = "HcpSolution", module = "d2d_caching", get_all, frozen)]
pub struct PyHcp {
    retained_intensity: Vec<f64>,
    radii: Vec<f64>,
    c_star: f64,
    m_c: usize,
    objective: f64,
    fixed_point: bool,
}

impl From<d2d::HcpSolution> for PyHcp {
    fn from(h: d2d::HcpSolution) -> Self {
        PyHcp {
            retained_intensity: h.retained_intensity,
            radii: h.radii,
            c_star: h.c_star,
            m_c: h.m_c,
            objective: h.objective,
            fixed_point: h.fixed_point,
        }
    }
}

#[pyclass(name = "AnalyticBounds", module = "d2d_caching", get_all, frozen)]
pub struct PyBounds {
    lower: f64,
    upper: f64,
    exact: Option<f64>,
    clamped: bool,
}

impl From<d2d::AnalyticBounds> for PyBounds {
    fn from(b: d2d::AnalyticBounds) -> Self {
        PyBounds { lower: b.lower, upper: b.upper, exact: b.exact, clamped: b.clamped }
    }
}

#[pyclass(name = "HitEstimate", module = "d2d_caching", get_all, frozen)]
pub struct PyEstimate {
    mean: f64,
    std_error: f64,
    replications: u64,
    per_file_hit: Vec<f64>,
}

#[pyclass(name = "Table2Row", module = "d2d_caching", get_all, frozen)]
pub struct PyTable2Row {
    label: String,
    d2d_radius: f64,
    mu_star: f64,
    p_g: (f64, f64),
    hit_g: f64,
    radii: (f64, f64),
    retained_intensity: (f64, f64),
    hit_lb: f64,
    hit_ub: f64,
    fixed_point: bool,
    mismatches: Vec<String>,
}

#[pyfunction]
fn zipf_pmf(catalog_size: usize, zipf_exponent: f64) -> PyResult<Vec<f64>> {
    Ok(scenario::zipf_pmf(catalog_size, zipf_exponent).map_err(py_err)?.as_slice().to_vec())
}

#[pyfunction]
fn lambert_w0(x: f64) -> PyResult<f64> {
    numerics::lambert_w0(x).map_err(py_err)
}

#[pyfunction]
fn lambert_w_minus1(x: f64) -> PyResult<f64> {
    numerics::lambert_w_minus1(x).map_err(py_err)
}

/// Fraction of caches kept by hard-core thinning with `c` mean competitors.
#[pyfunction]
fn retention_probability(c: f64) -> f64 {
    analytic::retention_probability(c)
}

#[pyfunction]
fn invert_retention(config: &PyScenario, marginal: f64) -> PyResult<f64> {
    optimizers::invert_retention(&config.inner, marginal).map_err(py_err)
}

#[pyfunction]
fn solve_gcp(config: &PyScenario) -> PyResult<PyGcp> {
    let pop = config.inner.popularity().map_err(py_err)?;
    let s = optimizers::solve_gcp(&config.inner, &pop).map_err(py_err)?;
    Ok(PyGcp { marginals: s.marginals, mu_star: s.mu_star })
}

#[pyfunction]
fn solve_hcp(config: &PyScenario) -> PyResult<PyHcp> {
    let pop = config.inner.popularity().map_err(py_err)?;
    Ok(optimizers::solve_hcp(&config.inner, &pop).map_err(py_err)?.into())
}

/// Direct numerical maximizer of the hard-core lower bound.
#[pyfunction]
fn numeric_oracle_hcp(config: &PyScenario) -> PyResult<PyHcp> {
    let pop = config.inner.popularity().map_err(py_err)?;
    Ok(optimizers::numeric_oracle_hcp(&config.inner, &pop).map_err(py_err)?.into())
}

/// Marginals and exclusion radii of the MHC-B placement.
#[pyfunction]
fn solve_mhc_b(config: &PyScenario) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let pop = config.inner.popularity().map_err(py_err)?;
    let p = optimizers::solve_mhc_b(&config.inner, &pop).map_err(py_err)?;
    let radii = p.radii().unwrap_or(&[]).to_vec();
    Ok((p.marginals, radii))
}

/// Analytic hit probability of the optimized policy of `strategy`
/// (`mpc`, `gcp`, `mhc_a` or `mhc_b`). Only `mhc_a` has distinct bounds.
#[pyfunction]
fn hit_probability(config: &PyScenario, strategy: &str) -> PyResult<PyBounds> {
    let cfg = &config.inner;
    let pop = cfg.popularity().map_err(py_err)?;
    let kind = parse_kind(strategy).map_err(py_err)?;
    let policy = optimized_policy(cfg, kind).map_err(py_err)?;
    let b = match kind {
        d2d::PlacementKind::Mpc => analytic::hit_mpc(cfg, &pop),
        d2d::PlacementKind::Gcp => analytic::hit_gcp(cfg, &pop, &policy.marginals),
        d2d::PlacementKind::MhcA => {
            analytic::hit_mhc_a_bounds(cfg, &pop, &policy, d2d::UpperBoundMeasure::Area).map_err(py_err)?
        }
        d2d::PlacementKind::MhcB => {
            analytic::hit_mhc_b(cfg, &pop, &policy.marginals, policy.radii().unwrap_or(&[]))
        }
    };
    Ok(b.into())
}

/// Monte Carlo hit estimate of the optimized policy of `strategy`.
#[pyfunction]
#[pyo3(signature = (config, strategy, replications, capacity = true, full_cache_blocks = false))]
fn estimate_hit(
    py: Python<'_>,
    config: &PyScenario,
    strategy: &str,
    replications: u64,
    capacity: bool,
    full_cache_blocks: bool,
) -> PyResult<PyEstimate> {
    let cfg = config.inner.clone();
    let kind = parse_kind(strategy).map_err(py_err)?;
    let options = d2d::SimOptions { capacity, full_cache_blocks, ..d2d::SimOptions::default() };
    let est = py
        .detach(|| -> d2d::Result<d2d::HitEstimate> {
            let pop = cfg.popularity()?;
            let policy = optimized_policy(&cfg, kind)?;
            simulator::estimate_hit(&cfg, &pop, &d2d::Strategy::from_policy(&policy), replications, &options)
        })
        .map_err(py_err)?;
    Ok(PyEstimate {
        mean: est.mean,
        std_error: est.std_error,
        replications: est.replications,
        per_file_hit: est.per_file_hit,
    })
}

/// The two-file example for seven D2D radii with reference comparisons.
#[pyfunction]
fn run_table2() -> PyResult<Vec<PyTable2Row>> {
    let rows = d2d::experiments::run_table2().map_err(py_err)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            let c = r.computed;
            PyTable2Row {
                label: r.label.to_string(),
                d2d_radius: r.d2d_radius,
                mu_star: c.mu_star,
                p_g: (c.p_g[0], c.p_g[1]),
                hit_g: c.hit_g,
                radii: (c.radii[0], c.radii[1]),
                retained_intensity: (c.lambda[0], c.lambda[1]),
                hit_lb: c.hit_lb,
                hit_ub: r.hit_ub,
                fixed_point: r.fixed_point,
                mismatches: r.mismatches().into_iter().map(String::from).collect(),
            }
        })
        .collect())
}

#[pymodule]
pub mod d2d_caching {
    #[pymodule_export]
    use super::{
        estimate_hit, hit_probability, invert_retention, lambert_w0, lambert_w_minus1, numeric_oracle_hcp,
        retention_probability, run_table2, solve_gcp, solve_hcp, solve_mhc_b, zipf_pmf, PyBounds, PyEstimate,
        PyGcp, PyHcp, PyScenario, PyTable2Row,
    };
}
