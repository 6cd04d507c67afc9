//! Python bindings: corpus parsing, representation stores, metrics, and the harness commands.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use relrep::corpus::{self, EntitySpan, LabeledSentence, Split};
use relrep::eval;
use relrep::harness::{self, HarnessError, RunConfig};
use relrep::neuralnet::gradcheck::{gradcheck_full_cnn, gradcheck_linear_toy, DEFAULT_STEP};
use relrep::representations::{self as repr, PosTagChannel, ReprError};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn repr_err(e: ReprError) -> PyErr {
    match e {
        ReprError::Io { .. } => PyIOError::new_err(e.to_string()),
        other => value_err(other),
    }
}

fn harness_err(e: HarnessError) -> PyErr {
    match e.exit_code() {
        harness::EXIT_INPUT => value_err(e),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for x in items {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, x) in map {
                dict.set_item(k, to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn serde_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(value).map_err(value_err)?)
}

/// One labeled sentence with its two nominal spans.
#[pyclass(name = "Sentence", module = "relrep_py", frozen, from_py_object)]
#[derive(Clone)]
struct PySentence {
    inner: LabeledSentence,
}

#[pymethods]
impl PySentence {
    #[new]
    #[pyo3(signature = (id, tokens, e1, e2, label))]
    fn new(id: u64, tokens: Vec<String>, e1: (usize, usize), e2: (usize, usize), label: &str) -> PyResult<Self> {
        let words: Vec<&str> = tokens.iter().map(String::as_str).collect();
        let inner = LabeledSentence::from_words(
            id,
            &words,
            EntitySpan::from_bounds(e1.0, e1.1),
            EntitySpan::from_bounds(e2.0, e2.1),
            label,
        );
        inner.validate().map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn id(&self) -> u64 {
        self.inner.id
    }

    #[getter]
    fn tokens(&self) -> Vec<String> {
        self.inner.words().map(str::to_string).collect()
    }

    /// `(start, end, head)`, end inclusive.
    #[getter]
    fn e1(&self) -> (usize, usize, usize) {
        let e = self.inner.e1;
        (e.start, e.end, e.head)
    }

    #[getter]
    fn e2(&self) -> (usize, usize, usize) {
        let e = self.inner.e2;
        (e.start, e.end, e.head)
    }

    #[getter]
    fn label(&self) -> &str {
        &self.inner.label
    }

    #[pyo3(signature = (max_dist = 30))]
    fn relative_positions(&self, max_dist: usize) -> Vec<(usize, usize)> {
        repr::relative_positions(&self.inner, max_dist)
    }

    fn to_record(&self) -> String {
        self.inner.to_record()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Sentence(id={}, tokens={}, label={:?})", self.inner.id, self.inner.len(), self.inner.label)
    }
}

fn wrap(ds: corpus::Dataset) -> Vec<PySentence> {
    ds.sentences.into_iter().map(|inner| PySentence { inner }).collect()
}

#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    corpus::tokenize(text).into_iter().map(|t| t.text).collect()
}

/// Parse SemEval-2010 Task 8 records.
#[pyfunction]
fn parse_semeval(text: &str) -> PyResult<Vec<PySentence>> {
    corpus::parse_semeval(text, Split::Train).map(wrap).map_err(value_err)
}

/// Load a raw corpus or JSON dataset file.
#[pyfunction]
fn load_dataset(path: PathBuf) -> PyResult<Vec<PySentence>> {
    corpus::Dataset::load(&path, Split::Train).map(wrap).map_err(value_err)
}

#[pyfunction]
fn dataset_to_json(sentences: Vec<PySentence>) -> PyResult<String> {
    let ds = corpus::Dataset::new(Split::Train, sentences.into_iter().map(|s| s.inner).collect());
    ds.to_json().map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (tag, tagset = None))]
fn pos_onehot(tag: &str, tagset: Option<Vec<String>>) -> Vec<f32> {
    let channel = match tagset {
        Some(tags) => PosTagChannel::new(tags.iter().map(String::as_str)),
        None => PosTagChannel::default(),
    };
    repr::pos_onehot(tag, &channel)
}

/// Text-format static embeddings with seeded OOV vectors.
#[pyclass(name = "StaticTable", module = "relrep_py", frozen)]
struct PyStaticTable {
    inner: repr::StaticTable,
}

#[pymethods]
impl PyStaticTable {
    #[staticmethod]
    #[pyo3(signature = (path, oov_seed = 0))]
    fn load(path: PathBuf, oov_seed: u64) -> PyResult<Self> {
        repr::load_static_text(&path, oov_seed).map(|inner| Self { inner }).map_err(repr_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn lookup(&self, word: &str) -> Vec<f32> {
        self.inner.lookup(word)
    }

    fn __contains__(&self, word: &str) -> bool {
        self.inner.contains(word)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Per-token contextual vectors in the CTXV1 format.
#[pyclass(name = "ContextualStore", module = "relrep_py")]
struct PyContextualStore {
    inner: repr::ContextualStore,
}

#[pymethods]
impl PyContextualStore {
    #[new]
    fn new(dim: usize, model_id: &str) -> Self {
        Self { inner: repr::ContextualStore::new(dim, model_id) }
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        repr::read_ctx_store(&path).map(|inner| Self { inner }).map_err(repr_err)
    }

    /// Writes the CTXV1 file and its `.manifest.json` companion.
    fn write(&self, path: PathBuf, corpus_hash: &str) -> PyResult<()> {
        repr::write_ctx_store(&path, &self.inner, corpus_hash).map_err(repr_err)
    }

    fn insert(&mut self, id: u64, vectors: Vec<Vec<f32>>) -> PyResult<()> {
        let dim = self.inner.dim();
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(value_err(format!("expected vectors of length {dim}, got {}", bad.len())));
        }
        self.inner.insert(id, vectors.concat()).map_err(repr_err)
    }

    fn sentence(&self, id: u64) -> Option<Vec<Vec<f32>>> {
        self.inner.sentence(id).map(|rows| rows.into_iter().map(<[f32]>::to_vec).collect())
    }

    fn ids(&self) -> Vec<u64> {
        self.inner.ids().collect()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn model_id(&self) -> &str {
        self.inner.model_id()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// `(precision, recall, f1)`; 0/0 counts as 0.
#[pyfunction]
fn prf(tp: u64, fp: u64, fn_: u64) -> (f64, f64, f64) {
    let p = eval::prf(tp, fp, fn_);
    (p.precision, p.recall, p.f1)
}

#[pyfunction]
fn boxplot_stats<'py>(py: Python<'py>, values: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    serde_to_py(py, &eval::boxplot_stats(&values).map_err(value_err)?)
}

/// Per-class, micro, and macro scores; a label named `Other` is left out of the macro average.
#[pyfunction]
#[pyo3(signature = (preds, golds, labels))]
fn evaluate<'py>(py: Python<'py>, preds: Vec<usize>, golds: Vec<usize>, labels: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
    let set = corpus::LabelSet::from_labels(labels.iter().map(String::as_str), corpus::DirectionPolicy::Keep);
    if set.len() != labels.len() {
        return Err(value_err("labels must be distinct"));
    }
    // LabelSet sorts its names; translate caller indices into its order.
    let remap: Vec<usize> = labels.iter().map(|l| set.encode(l).expect("label present")).collect();
    let map = |xs: &[usize]| -> PyResult<Vec<usize>> {
        xs.iter()
            .map(|&i| remap.get(i).copied().ok_or_else(|| value_err(format!("class {i} out of range"))))
            .collect()
    };
    let cm = eval::confusion(&map(&preds)?, &map(&golds)?, set.len()).map_err(value_err)?;
    serde_to_py(py, &eval::aggregate(&cm, &set).map_err(value_err)?)
}

/// Max relative error of a finite-difference gradient check in f64.
#[pyfunction]
#[pyo3(signature = (seed = 0, toy_linear = false))]
fn gradcheck(py: Python<'_>, seed: u64, toy_linear: bool) -> PyResult<f64> {
    let report = py.detach(|| {
        if toy_linear {
            gradcheck_linear_toy(seed, DEFAULT_STEP)
        } else {
            gradcheck_full_cnn(seed, DEFAULT_STEP)
        }
    });
    report.map(|r| r.max_rel_error).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Resolved run configuration; relative paths resolve against the file's directory.
#[pyclass(name = "RunConfig", module = "relrep_py", from_py_object)]
#[derive(Clone)]
struct PyRunConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyRunConfig {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        RunConfig::load(&path).map(|inner| Self { inner }).map_err(harness_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        RunConfig::from_json(text).map(|inner| Self { inner }).map_err(harness_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_pretty_json()
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }

    #[getter]
    fn seeds(&self) -> Vec<u64> {
        self.inner.seeds.clone()
    }

    #[setter]
    fn set_seeds(&mut self, seeds: Vec<u64>) {
        self.inner.seeds = seeds;
    }

    #[getter]
    fn out(&self) -> PathBuf {
        self.inner.out.clone()
    }

    #[setter]
    fn set_out(&mut self, out: PathBuf) {
        self.inner.out = out;
    }

    #[setter]
    fn set_workers(&mut self, workers: Option<usize>) {
        self.inner.workers = workers;
    }

    fn stacks(&self) -> Vec<String> {
        self.inner.stacks.iter().map(|s| s.name.clone()).collect()
    }
}

#[pyfunction]
fn prep(corpus: PathBuf, out: PathBuf) -> PyResult<(usize, usize)> {
    harness::cmd_prep(&corpus, &out).map_err(harness_err)
}

/// Train one stack with one seed; returns the metrics written to `metrics.json`.
#[pyfunction]
#[pyo3(signature = (config, seed, stack = None))]
fn train<'py>(py: Python<'py>, config: PyRunConfig, seed: u64, stack: Option<String>) -> PyResult<Bound<'py, PyAny>> {
    let metrics = py.detach(|| harness::cmd_train(config.inner, stack.as_deref(), seed, false)).map_err(harness_err)?;
    serde_to_py(py, &metrics)
}

/// Run the full sweep; returns the bench manifest.
#[pyfunction(name = "bench")]
fn run_bench<'py>(py: Python<'py>, config: PyRunConfig) -> PyResult<Bound<'py, PyAny>> {
    let manifest = py.detach(|| harness::cmd_bench(config.inner, false)).map_err(harness_err)?;
    serde_to_py(py, &manifest)
}

/// Rewrite the report CSVs under `out` and return the rendered table.
#[pyfunction]
fn report(out: PathBuf) -> PyResult<String> {
    harness::cmd_report(&out).map_err(harness_err)
}

#[pymodule]
fn relrep_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySentence>()?;
    m.add_class::<PyStaticTable>()?;
    m.add_class::<PyContextualStore>()?;
    m.add_class::<PyRunConfig>()?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(parse_semeval, m)?)?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(dataset_to_json, m)?)?;
    m.add_function(wrap_pyfunction!(pos_onehot, m)?)?;
    m.add_function(wrap_pyfunction!(prf, m)?)?;
    m.add_function(wrap_pyfunction!(boxplot_stats, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(gradcheck, m)?)?;
    m.add_function(wrap_pyfunction!(prep, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_values_become_python_objects() {
        Python::initialize();
        Python::attach(|py| {
            let v = serde_json::json!({"f1": 0.5, "seed": 7, "outliers": [1.0, 2.0], "note": null});
            let obj = to_py(py, &v).unwrap();
            let d = obj.cast::<PyDict>().unwrap();
            assert_eq!(d.get_item("f1").unwrap().unwrap().extract::<f64>().unwrap(), 0.5);
            assert_eq!(d.get_item("seed").unwrap().unwrap().extract::<u64>().unwrap(), 7);
            assert_eq!(d.get_item("outliers").unwrap().unwrap().extract::<Vec<f64>>().unwrap(), vec![1.0, 2.0]);
            assert!(d.get_item("note").unwrap().unwrap().is_none());
        });
    }

    #[test]
    fn evaluate_respects_caller_label_order() {
        Python::initialize();
        Python::attach(|py| {
            let labels = vec!["Zeta".to_string(), "Other".to_string(), "Alpha".to_string()];
            let m = evaluate(py, vec![0, 2, 1], vec![0, 2, 2], labels).unwrap();
            let per_class = m.get_item("per_class").unwrap();
            let zeta = per_class.get_item(2).unwrap();
            assert_eq!(zeta.get_item("name").unwrap().extract::<String>().unwrap(), "Zeta");
            assert_eq!(zeta.get_item("tp").unwrap().extract::<u64>().unwrap(), 1);
        });
    }
}
