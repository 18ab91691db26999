//! Python bindings for `chaining-bounds`.
//!
//! Bound evaluations and reports are returned as plain `dict`s with the same
//! field names as the Rust structs.

use chaining_bounds as cb;
use chaining_bounds::experiments::{self, ExperimentConfig};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

fn to_py_err(e: cb::Error) -> PyErr {
    match e {
        cb::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_pyobject(py)?.into_any(),
            (None, Some(i)) => i.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(value_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, value_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    value_to_py(py, &value)
}

#[pyclass(name = "ProbabilityVector", module = "chaining_bounds_py", frozen)]
pub struct PyProbabilityVector(cb::ProbabilityVector);

#[pymethods]
impl PyProbabilityVector {
    /// Normalizes nonnegative weights by their sum.
    #[new]
    fn new(weights: Vec<f64>) -> PyResult<Self> {
        cb::ProbabilityVector::from_weights(weights)
            .map(Self)
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn uniform(size: usize) -> PyResult<Self> {
        cb::ProbabilityVector::uniform(size).map(Self).map_err(to_py_err)
    }

    #[staticmethod]
    fn zipf(size: usize, exponent: f64) -> PyResult<Self> {
        cb::ProbabilityVector::zipf(size, exponent)
            .map(Self)
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn restricted_uniform(size: usize, alpha: f64) -> PyResult<Self> {
        cb::ProbabilityVector::restricted_uniform(size, alpha)
            .map(Self)
            .map_err(to_py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (size, index = 0))]
    fn point_mass(size: usize, index: usize) -> PyResult<Self> {
        cb::ProbabilityVector::point_mass(size, index)
            .map(Self)
            .map_err(to_py_err)
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    fn norm_sq(&self) -> f64 {
        self.0.norm_sq()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `count` i.i.d. key indices drawn with `seed`.
    fn sample(&self, seed: u64, count: usize) -> Vec<usize> {
        self.0.sample(seed, count).into_keys()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("ProbabilityVector(len={}, norm_sq={})", self.0.len(), self.0.norm_sq())
    }
}

#[pyclass(name = "HashModel", module = "chaining_bounds_py", frozen)]
pub struct PyHashModel(cb::HashModel);

#[pymethods]
impl PyHashModel {
    #[staticmethod]
    fn identity(slots: usize) -> PyResult<Self> {
        cb::HashModel::identity(slots).map(Self).map_err(to_py_err)
    }

    #[staticmethod]
    fn from_table(table: Vec<u32>, slots: usize) -> PyResult<Self> {
        cb::HashModel::from_table(table, slots)
            .map(Self)
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn random_table(universe: usize, slots: usize, seed: u64) -> PyResult<Self> {
        cb::HashModel::random_table(universe, slots, seed)
            .map(Self)
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: &str, slots: usize) -> PyResult<Self> {
        cb::HashModel::load_table_file(path, slots)
            .map(Self)
            .map_err(to_py_err)
    }

    #[getter]
    fn slots(&self) -> usize {
        self.0.slots()
    }

    #[getter]
    fn universe(&self) -> usize {
        self.0.universe()
    }

    fn slot_of(&self, key: usize) -> PyResult<usize> {
        if key >= self.0.universe() {
            return Err(PyValueError::new_err(format!("key {key} outside universe")));
        }
        Ok(self.0.slot_of(key))
    }
}

fn keys(x: Vec<usize>) -> cb::KeySequence {
    cb::KeySequence::from(x)
}

#[pyfunction]
fn slot_probabilities(q: &PyProbabilityVector, h: &PyHashModel) -> PyResult<PyProbabilityVector> {
    cb::slot_probabilities(&q.0, &h.0)
        .map(PyProbabilityVector)
        .map_err(to_py_err)
}

#[pyfunction]
fn count_slots(x: Vec<usize>, h: &PyHashModel) -> PyResult<Vec<u64>> {
    Ok(cb::count_slots(&keys(x), &h.0)
        .map_err(to_py_err)?
        .counts()
        .to_vec())
}

#[pyfunction]
fn distinct_counts(x: Vec<usize>, h: &PyHashModel) -> PyResult<Vec<u64>> {
    Ok(cb::distinct_counts(&keys(x), &h.0)
        .map_err(to_py_err)?
        .counts()
        .to_vec())
}

#[pyfunction]
fn collision_pairs(counts: Vec<u64>) -> u64 {
    cb::collision_pairs(&cb::SlotCounts::from_counts(counts))
}

#[pyfunction]
fn empirical_collision_probability(py: Python<'_>, counts: Vec<u64>) -> PyResult<Bound<'_, PyAny>> {
    let est = cb::empirical_collision_probability(&cb::SlotCounts::from_counts(counts))
        .map_err(to_py_err)?;
    to_dict(py, &est)
}

#[pyfunction]
fn brute_force_collision_pairs(x: Vec<usize>, h: &PyHashModel) -> PyResult<u64> {
    cb::brute_force_collision_pairs(&keys(x), &h.0).map_err(to_py_err)
}

#[pyfunction]
fn true_collision_probability(q: &PyProbabilityVector, h: &PyHashModel) -> PyResult<f64> {
    cb::true_collision_probability(&q.0, &h.0).map_err(to_py_err)
}

#[pyfunction]
fn relative_error(empirical_cp: f64, p_norm_sq: f64) -> PyResult<f64> {
    let est = cb::CollisionEstimate {
        empirical_cp,
        m: 2,
        collision_pairs: 0,
    };
    cb::relative_error(&est, p_norm_sq).map_err(to_py_err)
}

#[pyfunction]
fn gr_bound(py: Python<'_>, n: u64, beta: f64, lambda_: f64) -> PyResult<Bound<'_, PyAny>> {
    to_dict(py, &cb::gr_bound(n, beta, lambda_).map_err(to_py_err)?)
}

#[pyfunction]
fn main_bound(py: Python<'_>, n: u64, epsilon: f64, delta: f64, s: f64) -> PyResult<Bound<'_, PyAny>> {
    to_dict(py, &cb::main_bound(n, epsilon, delta, s).map_err(to_py_err)?)
}

#[pyfunction]
fn cor_fixed_s(py: Python<'_>, n: u64, epsilon: f64, delta: f64) -> PyResult<Bound<'_, PyAny>> {
    to_dict(py, &cb::cor_fixed_s(n, epsilon, delta).map_err(to_py_err)?)
}

#[pyfunction]
fn cor_load_factor(py: Python<'_>, epsilon: f64, load: f64) -> PyResult<Bound<'_, PyAny>> {
    to_dict(py, &cb::cor_load_factor(epsilon, load).map_err(to_py_err)?)
}

#[pyfunction]
fn cor_gr_form(py: Python<'_>, n: u64, beta: f64, lambda_: f64) -> PyResult<Bound<'_, PyAny>> {
    to_dict(py, &cb::cor_gr_form(n, beta, lambda_).map_err(to_py_err)?)
}

#[pyfunction]
fn params_from_load(py: Python<'_>, n: u64, load: f64, epsilon: f64) -> PyResult<Bound<'_, PyAny>> {
    to_dict(py, &cb::params_from_load(n, load, epsilon).map_err(to_py_err)?)
}

#[pyfunction]
fn ast_exact(v: &PyProbabilityVector, x: Vec<usize>, h: &PyHashModel) -> PyResult<f64> {
    cb::ast_exact(&v.0, &keys(x), &h.0).map_err(to_py_err)
}

#[pyfunction]
fn ast_upper_empirical(v: &PyProbabilityVector, counts: Vec<u64>) -> PyResult<f64> {
    cb::ast_upper_empirical(&v.0, &cb::SlotCounts::from_counts(counts)).map_err(to_py_err)
}

#[pyfunction]
fn ast_bound_s(
    py: Python<'_>,
    load: f64,
    n: u64,
    v_norm: f64,
    p_norm: f64,
    s: f64,
) -> PyResult<Bound<'_, PyAny>> {
    to_dict(py, &cb::ast_bound_s(load, n, v_norm, p_norm, s).map_err(to_py_err)?)
}

#[pyfunction]
fn ast_bound_eps(
    py: Python<'_>,
    load: f64,
    n: u64,
    v_norm: f64,
    p_norm: f64,
    epsilon: f64,
) -> PyResult<Bound<'_, PyAny>> {
    to_dict(
        py,
        &cb::ast_bound_eps(load, n, v_norm, p_norm, epsilon).map_err(to_py_err)?,
    )
}

#[pyfunction]
fn example1_bound(py: Python<'_>, c: f64, alpha: f64, epsilon: f64, load: f64) -> PyResult<Bound<'_, PyAny>> {
    to_dict(py, &cb::example1_bound(c, alpha, epsilon, load).map_err(to_py_err)?)
}

#[pyfunction]
fn example2_bound(
    py: Python<'_>,
    c: f64,
    alpha1: f64,
    alpha2: f64,
    epsilon: f64,
    load: f64,
) -> PyResult<Bound<'_, PyAny>> {
    to_dict(
        py,
        &cb::example2_bound(c, alpha1, alpha2, epsilon, load).map_err(to_py_err)?,
    )
}

#[pyfunction]
fn check_perturbation_lemma(x: Vec<usize>, y: Vec<usize>, h: &PyHashModel) -> PyResult<(u64, u64, bool)> {
    let c = cb::check_perturbation_lemma(&keys(x), &keys(y), &h.0).map_err(to_py_err)?;
    Ok((c.lhs, c.rhs, c.holds))
}

#[pyfunction]
fn unbiasedness_check<'py>(
    py: Python<'py>,
    q: &PyProbabilityVector,
    h: &PyHashModel,
    m: u64,
    trials: u64,
    base_seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let check = py
        .detach(|| cb::unbiasedness_check(&q.0, &h.0, m, trials, base_seed))
        .map_err(to_py_err)?;
    to_dict(py, &check)
}

/// Runs the experiment described by a TOML config string and returns the report.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config_toml: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExperimentConfig::from_toml_str(config_toml).map_err(to_py_err)?;
    let report = py
        .detach(|| experiments::run_experiment(&cfg))
        .map_err(to_py_err)?;
    to_dict(py, &report)
}

#[pymodule]
fn chaining_bounds_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProbabilityVector>()?;
    m.add_class::<PyHashModel>()?;
    m.add_function(wrap_pyfunction!(slot_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(count_slots, m)?)?;
    m.add_function(wrap_pyfunction!(distinct_counts, m)?)?;
    m.add_function(wrap_pyfunction!(collision_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_collision_probability, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_collision_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(true_collision_probability, m)?)?;
    m.add_function(wrap_pyfunction!(relative_error, m)?)?;
    m.add_function(wrap_pyfunction!(gr_bound, m)?)?;
    m.add_function(wrap_pyfunction!(main_bound, m)?)?;
    m.add_function(wrap_pyfunction!(cor_fixed_s, m)?)?;
    m.add_function(wrap_pyfunction!(cor_load_factor, m)?)?;
    m.add_function(wrap_pyfunction!(cor_gr_form, m)?)?;
    m.add_function(wrap_pyfunction!(params_from_load, m)?)?;
    m.add_function(wrap_pyfunction!(ast_exact, m)?)?;
    m.add_function(wrap_pyfunction!(ast_upper_empirical, m)?)?;
    m.add_function(wrap_pyfunction!(ast_bound_s, m)?)?;
    m.add_function(wrap_pyfunction!(ast_bound_eps, m)?)?;
    m.add_function(wrap_pyfunction!(example1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(example2_bound, m)?)?;
    m.add_function(wrap_pyfunction!(check_perturbation_lemma, m)?)?;
    m.add_function(wrap_pyfunction!(unbiasedness_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
