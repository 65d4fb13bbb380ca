//! Python bindings: datasets, the synthetic generator, SVM training and
//! prediction, rebalancing and metrics.

use galloping::data::{self, FeatureId, FeatureMask, Label, SplitSpec};
use galloping::experiments::{self, FitOptions};
use galloping::metrics::{self, MetricsReport};
use galloping::sampling::{self, SamplingKind, SamplingStrategy};
use galloping::svm;
use galloping::synth::{self, SynthConfig};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: galloping::Error) -> PyErr {
    match e {
        galloping::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn label_from_int(v: i64) -> PyResult<Label> {
    Label::from_value(v).ok_or_else(|| PyValueError::new_err(format!("invalid label {v} (expected 1 or -1)")))
}

fn mask_from_names(features: Option<&str>) -> PyResult<FeatureMask> {
    match features {
        Some(names) => FeatureMask::parse_names(names).map_err(to_py),
        None => Ok(FeatureMask::trio()),
    }
}

/// Labeled weather samples. Labels are `1` (galloping) or `-1` (normal).
#[pyclass(name = "Dataset", module = "galloping_py")]
pub struct PyDataset {
    inner: data::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Builds a dataset from feature names, rows and integer labels.
    #[new]
    fn new(columns: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<i64>) -> PyResult<Self> {
        let columns = columns
            .iter()
            .map(|c| FeatureId::from_name(c).ok_or_else(|| PyValueError::new_err(format!("unknown feature `{c}`"))))
            .collect::<PyResult<Vec<_>>>()?;
        let labels = labels.into_iter().map(label_from_int).collect::<PyResult<Vec<_>>>()?;
        let inner = data::Dataset::from_rows(columns, &rows, &labels).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: data::load_csv(path).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        data::write_csv(&self.inner, path).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n={}, columns=[{}], galloping={})",
            self.inner.len(),
            self.columns().join(", "),
            self.inner.class_count(Label::Galloping)
        )
    }

    fn columns(&self) -> Vec<&'static str> {
        self.inner.columns().iter().map(|f| f.name()).collect()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().map(<[f64]>::to_vec).collect()
    }

    fn labels(&self) -> Vec<i64> {
        self.inner.labels().iter().map(|l| i64::from(l.value())).collect()
    }

    /// `(galloping, normal)` counts.
    fn class_counts(&self) -> (usize, usize) {
        (self.inner.class_count(Label::Galloping), self.inner.class_count(Label::Normal))
    }

    /// Keeps only the named features (comma-separated).
    fn project(&self, features: &str) -> PyResult<Self> {
        let mask = FeatureMask::parse_names(features).map_err(to_py)?;
        Ok(Self {
            inner: data::project(&self.inner, mask).map_err(to_py)?,
        })
    }

    /// Stratified `(train, test)` split.
    #[pyo3(signature = (seed, test_fraction = SplitSpec::DEFAULT_TEST_FRACTION))]
    fn split(&self, seed: u64, test_fraction: f64) -> PyResult<(Self, Self)> {
        let spec = SplitSpec::new(test_fraction, seed).map_err(to_py)?;
        let (train, test) = data::train_test_split(&self.inner, &spec).map_err(to_py)?;
        Ok((Self { inner: train }, Self { inner: test }))
    }
}

/// A trained Gaussian-kernel SVM carrying its feature subset and scaling.
#[pyclass(name = "Model", module = "galloping_py")]
pub struct PyModel {
    inner: svm::SvmModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: svm::load_model(path).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        svm::save_model(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn features(&self) -> Vec<&'static str> {
        self.inner.columns().iter().map(|f| f.name()).collect()
    }

    #[getter]
    fn support_vector_count(&self) -> usize {
        self.inner.support_vector_count()
    }

    #[getter]
    fn bias(&self) -> f64 {
        self.inner.bias()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.kernel().gamma()
    }

    /// Decision values for every sample of a raw dataset.
    fn decision_function(&self, dataset: &PyDataset) -> PyResult<Vec<f64>> {
        let prepared = self.inner.prepare(&dataset.inner).map_err(to_py)?;
        prepared
            .rows()
            .map(|x| self.inner.decision_value(x).map_err(to_py))
            .collect()
    }

    /// Predicted labels (`1` or `-1`) for a raw dataset.
    fn predict(&self, dataset: &PyDataset) -> PyResult<Vec<i64>> {
        let prepared = self.inner.prepare(&dataset.inner).map_err(to_py)?;
        prepared
            .rows()
            .map(|x| self.inner.predict(x).map(|l| i64::from(l.value())).map_err(to_py))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(features=[{}], support_vectors={}, C={}, gamma={})",
            self.features().join(", "),
            self.inner.support_vector_count(),
            self.inner.c(),
            self.inner.kernel().gamma()
        )
    }
}

/// Draws a synthetic dataset.
#[pyfunction]
#[pyo3(signature = (n, seed, galloping_fraction = SynthConfig::DEFAULT_GALLOPING_FRACTION, label_noise = SynthConfig::DEFAULT_LABEL_NOISE))]
fn generate(py: Python<'_>, n: usize, seed: u64, galloping_fraction: f64, label_noise: f64) -> PyResult<PyDataset> {
    let config = SynthConfig {
        galloping_fraction,
        label_noise,
        ..SynthConfig::new(n, seed)
    };
    let inner = py.detach(|| synth::generate(&config)).map_err(to_py)?;
    Ok(PyDataset { inner })
}

fn parse_kind(name: &str) -> PyResult<SamplingKind> {
    name.parse::<SamplingKind>().map_err(to_py)
}

/// Scales, optionally rebalances and trains on a raw dataset.
#[pyfunction]
#[pyo3(signature = (dataset, seed, features = None, c = 10.0, gamma = None, grid_search = false, sampling = "none", smote_k = 5, target_ratio = 1.0))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    dataset: &PyDataset,
    seed: u64,
    features: Option<&str>,
    c: f64,
    gamma: Option<f64>,
    grid_search: bool,
    sampling: &str,
    smote_k: usize,
    target_ratio: f64,
) -> PyResult<PyModel> {
    let mask = mask_from_names(features)?;
    let projected = data::project(&dataset.inner, mask).map_err(to_py)?;
    let strategy = SamplingStrategy {
        kind: parse_kind(sampling)?,
        k_neighbors: smote_k,
        target_ratio,
        seed: experiments::derive_seed(seed, "sampling", 0),
    };
    let options = FitOptions {
        c,
        gamma,
        grid_search,
        ..FitOptions::default()
    };
    let inner = py
        .detach(|| experiments::fit(&projected, &options, Some(&strategy), experiments::derive_seed(seed, "train", 0)))
        .map_err(to_py)?;
    Ok(PyModel { inner })
}

fn report_dict<'py>(py: Python<'py>, r: &MetricsReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("tp", r.tp)?;
    d.set_item("fp", r.fp)?;
    d.set_item("fn", r.fn_)?;
    d.set_item("tn", r.tn)?;
    d.set_item("precision", r.precision)?;
    d.set_item("recall", r.recall)?;
    d.set_item("f1", r.f1)?;
    Ok(d)
}

/// Confusion counts and precision/recall/F1 (`None` when undefined).
#[pyfunction]
fn evaluate<'py>(py: Python<'py>, model: &PyModel, dataset: &PyDataset) -> PyResult<Bound<'py, PyDict>> {
    let report = metrics::evaluate(&model.inner, &dataset.inner).map_err(to_py)?;
    report_dict(py, &report)
}

/// Metrics from parallel lists of true and predicted labels.
#[pyfunction]
fn score<'py>(py: Python<'py>, y_true: Vec<i64>, y_pred: Vec<i64>) -> PyResult<Bound<'py, PyDict>> {
    if y_true.len() != y_pred.len() {
        return Err(PyValueError::new_err("label lists differ in length"));
    }
    let pairs = y_true
        .into_iter()
        .zip(y_pred)
        .map(|(t, p)| Ok(metrics::LabeledPrediction::new(label_from_int(t)?, label_from_int(p)?)))
        .collect::<PyResult<Vec<_>>>()?;
    report_dict(py, &metrics::confusion(&pairs).map_err(to_py)?)
}

/// Rebalances with `"none"`, `"under"` or `"smote"`.
#[pyfunction]
#[pyo3(signature = (dataset, kind, seed, k_neighbors = 5, target_ratio = 1.0))]
fn resample(dataset: &PyDataset, kind: &str, seed: u64, k_neighbors: usize, target_ratio: f64) -> PyResult<PyDataset> {
    let strategy = SamplingStrategy {
        kind: parse_kind(kind)?,
        k_neighbors,
        target_ratio,
        seed,
    };
    Ok(PyDataset {
        inner: sampling::apply(&dataset.inner, &strategy).map_err(to_py)?,
    })
}

/// Histogram estimate of KL(p || q).
#[pyfunction]
#[pyo3(signature = (p, q, bins = metrics::DEFAULT_KL_BINS))]
fn kl_divergence(p: Vec<f64>, q: Vec<f64>, bins: usize) -> PyResult<f64> {
    metrics::kl_divergence(&p, &q, bins).map_err(to_py)
}

#[pymodule]
fn galloping_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(resample, m)?)?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    m.add("FEATURES", FeatureId::ALL.iter().map(|f| f.name()).collect::<Vec<_>>())?;
    Ok(())
}
