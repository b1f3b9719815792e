//! Python bindings: restriction sets, reduced-form parameters, the two
//! Q-samplers, the robust layer and whole-run execution.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use svarsoft::bivariate::{connected_identified_set, disconnected_identified_set, BivariatePhi};
use svarsoft::config::RunConfig;
use svarsoft::linalg::{draw_standard_matrix_normal, orthonormal_factor, Matrix, RngStream};
use svarsoft::model::{compute_irf_coefficients, ReducedFormParams};
use svarsoft::restrictions::{parse_restrictions, MarginContext, NormalisationMode, RestrictionSet};
use svarsoft::robust::{self, Interval};
use svarsoft::samplers::{self, AcceptRejectConfig, SliceConfig};
use svarsoft::soft;
use svarsoft::SvarError;

fn to_py(e: SvarError) -> PyErr {
    match e.exit_code() {
        svarsoft::error::EXIT_INPUT if matches!(e, SvarError::Io { .. }) => PyIOError::new_err(e.to_string()),
        svarsoft::error::EXIT_INPUT => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<Matrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(Matrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// A parsed restriction file.
#[pyclass(name = "RestrictionSet", module = "svarsoft_py", frozen)]
struct PyRestrictionSet {
    inner: RestrictionSet,
}

#[pymethods]
impl PyRestrictionSet {
    /// Parse the YAML restriction format. Narrative dates are not resolvable
    /// without a dataset, so only non-narrative files are accepted here.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: parse_restrictions(text, None).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.inner.variables().to_vec()
    }

    #[getter]
    fn shocks(&self) -> Vec<String> {
        self.inner.shocks().to_vec()
    }

    #[getter]
    fn margin_count(&self) -> usize {
        self.inner.margin_count()
    }

    /// "soft" or "mechanical".
    #[getter]
    fn normalisation(&self) -> &'static str {
        match self.inner.mode() {
            NormalisationMode::Soft => "soft",
            NormalisationMode::Mechanical => "mechanical",
        }
    }

    fn with_normalisation(&self, mode: &str) -> PyResult<Self> {
        let mode = match mode {
            "soft" => NormalisationMode::Soft,
            "mechanical" => NormalisationMode::Mechanical,
            other => return Err(PyValueError::new_err(format!("unknown normalisation '{other}'"))),
        };
        Ok(Self {
            inner: self.inner.with_mode(mode),
        })
    }

    /// Margins m_l(φ, Q) in restriction order.
    fn margins(&self, phi: &PyPhi, q: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let q = matrix(&q)?;
        let irf = compute_irf_coefficients(&phi.inner, self.inner.required_horizon());
        let prepared = self
            .inner
            .prepare(&phi.inner, &MarginContext { irf: &irf, innovations: None })
            .map_err(to_py)?;
        Ok(prepared.margins(&q))
    }

    fn __repr__(&self) -> String {
        format!(
            "RestrictionSet(n={}, restrictions={}, margins={})",
            self.inner.n(),
            self.inner.restrictions().len(),
            self.inner.margin_count()
        )
    }
}

/// Reduced-form parameters φ = (B, Σ_tr).
#[pyclass(name = "Phi", module = "svarsoft_py", frozen)]
struct PyPhi {
    inner: ReducedFormParams,
}

#[pymethods]
impl PyPhi {
    /// `b` is n × (n·lags + constant) with lag blocks first; `sigma_tr` is
    /// the lower Cholesky factor of the innovation covariance.
    #[new]
    #[pyo3(signature = (sigma_tr, b=None, lags=0, constant=false))]
    fn new(sigma_tr: Vec<Vec<f64>>, b: Option<Vec<Vec<f64>>>, lags: usize, constant: bool) -> PyResult<Self> {
        let s = matrix(&sigma_tr)?;
        let n = s.nrows();
        let b = match b {
            Some(b) => matrix(&b)?,
            None => Matrix::zeros(n, n * lags + usize::from(constant)),
        };
        Ok(Self {
            inner: ReducedFormParams::new(lags, constant, b, s).map_err(to_py)?,
        })
    }

    /// φ = (σ₁₁, σ₂₁, σ₂₂) of the bivariate static model.
    #[staticmethod]
    fn bivariate(s11: f64, s21: f64, s22: f64) -> PyResult<Self> {
        Ok(Self {
            inner: ReducedFormParams::bivariate(s11, s21, s22).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn sigma_tr(&self) -> Vec<Vec<f64>> {
        rows(self.inner.sigma_tr())
    }

    /// Impulse responses η_ij,h = (C_h Σ_tr Q)_ij for h = 0..=horizon.
    fn impulse_responses(&self, q: Vec<Vec<f64>>, horizon: usize) -> PyResult<Vec<Vec<Vec<f64>>>> {
        let q = matrix(&q)?;
        let irf = compute_irf_coefficients(&self.inner, horizon);
        Ok((0..=horizon).map(|h| rows(&(irf.matrix(h) * &q))).collect())
    }
}

/// Output of one sampler call at a fixed φ.
#[pyclass(name = "SampleResult", module = "svarsoft_py", frozen, get_all)]
struct PySampleResult {
    /// Raw draws of Q (row-major nested lists).
    draws: Vec<Vec<Vec<f64>>>,
    /// Importance weights; all ones for accept-reject.
    weights: Vec<f64>,
    /// Indices into `draws` after resampling.
    resampled: Vec<usize>,
    /// Slice-sampler evaluations or accept-reject attempts.
    effort: u64,
    ess_percent: Option<f64>,
}

#[pymethods]
impl PySampleResult {
    #[getter]
    fn empty(&self) -> bool {
        self.draws.is_empty()
    }

    fn __len__(&self) -> usize {
        self.draws.len()
    }
}

fn prepare(
    set: &PyRestrictionSet,
    phi: &PyPhi,
) -> PyResult<svarsoft::restrictions::PreparedRestrictions> {
    if set.inner.has_narrative() {
        return Err(PyValueError::new_err("narrative restrictions need a dataset; use run()"));
    }
    let irf = compute_irf_coefficients(&phi.inner, set.inner.required_horizon());
    set.inner
        .prepare(&phi.inner, &MarginContext { irf: &irf, innovations: None })
        .map_err(to_py)
}

/// Soft-sign slice sampler at a fixed φ followed by K-fold resampling.
#[pyfunction]
#[pyo3(signature = (restrictions, phi, delta=1e-5, m=1000, k=None, seed=0, burn_in=0, thin=1))]
#[allow(clippy::too_many_arguments)]
fn soft_sign_sample(
    py: Python<'_>,
    restrictions: &PyRestrictionSet,
    phi: &PyPhi,
    delta: f64,
    m: usize,
    k: Option<usize>,
    seed: u64,
    burn_in: usize,
    thin: usize,
) -> PyResult<PySampleResult> {
    let prepared = prepare(restrictions, phi)?;
    let cfg = SliceConfig {
        burn_in,
        thin,
        ..SliceConfig::with_delta(delta, m)
    };
    py.detach(|| {
        let mut rng = RngStream::new(seed, 0);
        let batch = samplers::soft_sign_sample(&prepared, &cfg, &mut rng)?;
        if batch.is_empty_verdict() {
            return Ok(PySampleResult {
                draws: vec![],
                weights: vec![],
                resampled: vec![],
                effort: batch.evaluations,
                ess_percent: None,
            });
        }
        let resampled = soft::resample_indices(&batch.weights, k.unwrap_or(m), &mut rng)?;
        Ok(PySampleResult {
            draws: batch.draws.iter().map(rows).collect(),
            ess_percent: batch.ess_percent(),
            weights: batch.weights,
            resampled,
            effort: batch.evaluations,
        })
    })
    .map_err(to_py)
}

/// Accept-reject on Haar draws; only the first search is bounded by `max_attempts`.
#[pyfunction]
#[pyo3(signature = (restrictions, phi, count=1000, seed=0, max_attempts=1000))]
fn accept_reject_sample(
    py: Python<'_>,
    restrictions: &PyRestrictionSet,
    phi: &PyPhi,
    count: usize,
    seed: u64,
    max_attempts: u64,
) -> PyResult<PySampleResult> {
    let prepared = prepare(restrictions, phi)?;
    py.detach(|| {
        let mut rng = RngStream::new(seed, 0);
        let batch = samplers::accept_reject_sample(&prepared, count, &AcceptRejectConfig { max_attempts }, &mut rng)?;
        let len = batch.draws.len();
        Ok(PySampleResult {
            draws: batch.draws.iter().map(rows).collect(),
            weights: vec![1.0; len],
            resampled: (0..len).collect(),
            effort: batch.total_attempts,
            ess_percent: None,
        })
    })
    .map_err(to_py)
}

/// A Haar-distributed n × n orthogonal matrix.
#[pyfunction]
#[pyo3(signature = (n, seed=0))]
fn haar(n: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let z = draw_standard_matrix_normal(n, &mut RngStream::new(seed, 0));
    Ok(rows(&orthonormal_factor(&z).map_err(to_py)?))
}

/// Σ log Λ(m, Δ) and the importance weight for a vector of margins.
#[pyfunction]
fn importance_weight(margins: Vec<f64>, delta: f64) -> f64 {
    soft::importance_weight(&margins, delta)
}

#[pyfunction]
fn effective_sample_size(weights: Vec<f64>) -> PyResult<f64> {
    soft::effective_sample_size(&weights).map_err(to_py)
}

/// θ-intervals (lo, hi, branch) of the bivariate identified set.
#[pyfunction]
#[pyo3(signature = (design, s11=1.0, s21=-0.5, s22=1.0, parameter=1.0))]
fn bivariate_identified_set(
    design: &str,
    s11: f64,
    s21: f64,
    s22: f64,
    parameter: f64,
) -> PyResult<Vec<(f64, f64, &'static str)>> {
    let phi = BivariatePhi::new(s11, s21, s22).map_err(to_py)?;
    let set = match design {
        "connected" => connected_identified_set(&phi, parameter),
        "disconnected" => disconnected_identified_set(&phi, parameter),
        other => return Err(PyValueError::new_err(format!("unknown design '{other}'"))),
    }
    .map_err(to_py)?;
    Ok(set.intervals.iter().map(|iv| (iv.lo, iv.hi, iv.branch.name())).collect())
}

#[pyfunction]
fn required_draws(d: usize, epsilon: f64, delta: f64) -> PyResult<u64> {
    robust::required_draws(d, epsilon, delta).map_err(to_py)
}

/// Shortest interval containing a fraction `alpha` of the (lo, hi) bounds.
#[pyfunction]
fn robust_credible_interval(bounds: Vec<(f64, f64)>, alpha: f64) -> PyResult<(f64, f64)> {
    let bounds: Vec<Interval> = bounds.into_iter().map(|(lo, hi)| Interval::new(lo, hi)).collect();
    let iv = robust::robust_credible_interval(&bounds, alpha).map_err(to_py)?;
    Ok((iv.lo, iv.hi))
}

/// Execute a run configuration file; returns the paths written.
#[pyfunction]
#[pyo3(signature = (config, out=None, seed=None))]
fn run(py: Python<'_>, config: PathBuf, out: Option<PathBuf>, seed: Option<u64>) -> PyResult<Vec<PathBuf>> {
    let mut cfg = RunConfig::load(&config).map_err(to_py)?;
    if let Some(o) = out {
        cfg.out = o;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    py.detach(|| svarsoft::run::run(&cfg)).map(|r| r.files).map_err(to_py)
}

#[pymodule]
fn svarsoft_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRestrictionSet>()?;
    m.add_class::<PyPhi>()?;
    m.add_class::<PySampleResult>()?;
    m.add_function(wrap_pyfunction!(soft_sign_sample, m)?)?;
    m.add_function(wrap_pyfunction!(accept_reject_sample, m)?)?;
    m.add_function(wrap_pyfunction!(haar, m)?)?;
    m.add_function(wrap_pyfunction!(importance_weight, m)?)?;
    m.add_function(wrap_pyfunction!(effective_sample_size, m)?)?;
    m.add_function(wrap_pyfunction!(bivariate_identified_set, m)?)?;
    m.add_function(wrap_pyfunction!(required_draws, m)?)?;
    m.add_function(wrap_pyfunction!(robust_credible_interval, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
