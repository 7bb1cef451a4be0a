//! Python bindings for hamfcm-core.

use hamfcm_core::clustering::{self, ClusterConfig, Dataset};
use hamfcm_core::evaluation::{self, LabelColumn};
use hamfcm_core::hedge_algebra::{self as ha, LinguisticTerm};
use hamfcm_core::Error;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io { .. } => PyIOError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn dataset(rows: Vec<Vec<f64>>) -> PyResult<Dataset> {
    Dataset::from_rows(rows).map_err(to_py)
}

/// Generator and hedge measures of the algebra.
#[pyclass(name = "HedgeParams", module = "hamfcm", skip_from_py_object)]
#[derive(Clone)]
struct PyHedgeParams {
    inner: ha::HedgeParams,
}

#[pymethods]
impl PyHedgeParams {
    #[new]
    #[pyo3(signature = (fm_small=0.5, mu_less=0.25, mu_possibly=0.25, mu_more=0.25, mu_very=0.25, depth=3))]
    fn new(fm_small: f64, mu_less: f64, mu_possibly: f64, mu_more: f64, mu_very: f64, depth: usize) -> PyResult<Self> {
        let inner = ha::HedgeParams {
            fm_small,
            fm_big: 1.0 - fm_small,
            mu_less,
            mu_possibly,
            mu_more,
            mu_very,
            depth_bound: depth,
        };
        inner.validate().map_err(to_py)?;
        Ok(PyHedgeParams { inner })
    }

    #[getter]
    fn fm_small(&self) -> f64 {
        self.inner.fm_small
    }

    #[getter]
    fn fm_big(&self) -> f64 {
        self.inner.fm_big
    }

    #[getter]
    fn mu_less(&self) -> f64 {
        self.inner.mu_less
    }

    #[getter]
    fn mu_possibly(&self) -> f64 {
        self.inner.mu_possibly
    }

    #[getter]
    fn mu_more(&self) -> f64 {
        self.inner.mu_more
    }

    #[getter]
    fn mu_very(&self) -> f64 {
        self.inner.mu_very
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth_bound
    }

    fn as_dict(&self) -> Vec<(&'static str, f64)> {
        self.inner.named().to_vec()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "HedgeParams(fm_small={}, fm_big={}, mu_less={}, mu_possibly={}, mu_more={}, mu_very={}, depth={})",
            p.fm_small, p.fm_big, p.mu_less, p.mu_possibly, p.mu_more, p.mu_very, p.depth_bound
        )
    }
}

fn params_or_default(params: Option<PyRef<'_, PyHedgeParams>>) -> ha::HedgeParams {
    params.map(|p| p.inner).unwrap_or_default()
}

/// Enumerated term table with quantification and its inverse.
#[pyclass(name = "HedgeAlgebra", module = "hamfcm")]
struct PyHedgeAlgebra {
    inner: ha::HedgeAlgebra,
}

#[pymethods]
impl PyHedgeAlgebra {
    #[new]
    #[pyo3(signature = (params=None))]
    fn new(params: Option<PyRef<'_, PyHedgeParams>>) -> PyResult<Self> {
        let inner = ha::HedgeAlgebra::new(params_or_default(params)).map_err(to_py)?;
        Ok(PyHedgeAlgebra { inner })
    }

    /// Semantic value of a term such as "very small".
    fn quantify(&self, term: &str) -> PyResult<f64> {
        let term: LinguisticTerm = term.parse().map_err(to_py)?;
        self.inner.quantify(&term).map_err(to_py)
    }

    /// `(term, v, fm)` of the term whose value is nearest to `q`.
    fn inverse_quantify(&self, q: f64) -> PyResult<(String, f64, f64)> {
        let t = self.inner.inverse_quantify(q).map_err(to_py)?;
        Ok((t.term.to_string(), t.v, t.fm))
    }

    fn mapping_error(&self, q: f64) -> PyResult<f64> {
        self.inner.mapping_error(q).map_err(to_py)
    }

    fn confidence(&self, q: f64) -> PyResult<f64> {
        self.inner.confidence(q).map_err(to_py)
    }

    /// `(term, depth, v, fm, interval_lo, interval_hi)` rows sorted by v.
    fn terms(&self) -> Vec<(String, usize, f64, f64, f64, f64)> {
        self.inner
            .terms()
            .iter()
            .map(|t| (t.term.to_string(), t.term.depth(), t.v, t.fm, t.lo, t.hi))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.terms().len()
    }
}

#[pyclass(name = "ClusterResult", module = "hamfcm")]
struct PyClusterResult {
    inner: clustering::ClusterResult,
}

#[pymethods]
impl PyClusterResult {
    #[getter]
    fn centroids(&self) -> Vec<Vec<f64>> {
        self.inner.centroids.outer_iter().map(|r| r.to_vec()).collect()
    }

    #[getter]
    fn membership(&self) -> Vec<Vec<f64>> {
        self.inner.membership.as_array().outer_iter().map(|r| r.to_vec()).collect()
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.inner.labels.clone()
    }

    #[getter]
    fn objective_trace(&self) -> Vec<f64> {
        self.inner.objective_trace.clone()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn guard_iteration(&self) -> Option<usize> {
        self.inner.guard_iteration
    }

    #[getter]
    fn ha_params(&self) -> Option<PyHedgeParams> {
        self.inner.final_ha_params.map(|inner| PyHedgeParams { inner })
    }

    /// `(m, membership)` pairs sorted by m.
    #[getter]
    fn exponent_fuzzy_set(&self) -> Vec<(f64, f64)> {
        self.inner.exponent_fuzzy_set.iter().map(|g| (g.m, g.membership)).collect()
    }

    /// The result document as a JSON string.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_document()).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "ClusterResult(clusters={}, iterations={}, converged={})",
            self.inner.centroids.nrows(),
            self.inner.iterations,
            self.inner.converged
        )
    }
}

/// Classical fuzzy c-means with a single exponent.
#[pyfunction]
#[pyo3(signature = (data, clusters, m=2.0, epsilon=1e-6, max_iter=300, seed=1))]
fn fcm(
    py: Python<'_>,
    data: Vec<Vec<f64>>,
    clusters: usize,
    m: f64,
    epsilon: f64,
    max_iter: usize,
    seed: u64,
) -> PyResult<PyClusterResult> {
    let data = dataset(data)?;
    let inner = py
        .detach(|| clustering::run_fcm(&data, clusters, m, epsilon, max_iter, seed))
        .map_err(to_py)?;
    Ok(PyClusterResult { inner })
}

/// Fuzzy c-means with per-entry exponents in `[m_min, m_max]`.
#[pyfunction]
#[pyo3(signature = (data, clusters, m_min=1.5, m_max=20.0, epsilon=1e-6, max_iter=300, seed=1, ha_params=None, ha_update_cap=Some(20)))]
#[allow(clippy::too_many_arguments)]
fn hamfcm(
    py: Python<'_>,
    data: Vec<Vec<f64>>,
    clusters: usize,
    m_min: f64,
    m_max: f64,
    epsilon: f64,
    max_iter: usize,
    seed: u64,
    ha_params: Option<PyRef<'_, PyHedgeParams>>,
    ha_update_cap: Option<usize>,
) -> PyResult<PyClusterResult> {
    let data = dataset(data)?;
    let config = ClusterConfig {
        clusters,
        m_min,
        m_max,
        epsilon,
        max_iter,
        seed,
        ha_params: params_or_default(ha_params),
        ha_update_cap,
    };
    let inner = py.detach(|| clustering::run_hamfcm(&data, &config)).map_err(to_py)?;
    Ok(PyClusterResult { inner })
}

/// Fraction of elements whose cluster matches its class under the best
/// one-to-one relabeling.
#[pyfunction]
fn clustering_accuracy(predicted: Vec<usize>, truth: Vec<usize>) -> PyResult<f64> {
    evaluation::clustering_accuracy(&predicted, &truth).map_err(to_py)
}

#[pyfunction]
fn minmax_normalize(data: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    Ok(evaluation::minmax_normalize(&dataset(data)?).rows())
}

/// Rows, labels when a label column was read, and class names.
type Loaded = (Vec<Vec<f64>>, Option<Vec<usize>>, Vec<String>);

/// Reads a numeric CSV.
#[pyfunction]
#[pyo3(signature = (path, label_col="auto"))]
fn load_dataset(path: &str, label_col: &str) -> PyResult<Loaded> {
    let column: LabelColumn = label_col.parse().map_err(to_py)?;
    let loaded = evaluation::load_dataset(path, column, b',').map_err(to_py)?;
    Ok((loaded.data.rows(), loaded.labels, loaded.class_names))
}

#[pymodule]
#[pyo3(name = "hamfcm")]
fn hamfcm_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHedgeParams>()?;
    m.add_class::<PyHedgeAlgebra>()?;
    m.add_class::<PyClusterResult>()?;
    m.add_function(wrap_pyfunction!(fcm, m)?)?;
    m.add_function(wrap_pyfunction!(hamfcm, m)?)?;
    m.add_function(wrap_pyfunction!(clustering_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(minmax_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    Ok(())
}
