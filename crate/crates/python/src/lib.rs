//! Python bindings. Results come back as plain dicts mirroring the JSON shape
//! of the Rust types; errors raise `ValueError`.

use std::path::PathBuf;

use effitest_core::cross::{align, pearson};
use effitest_core::hp::{default_lambda, hp_filter, Frequency};
use effitest_core::ingest::{parse_price_csv, CsvSchema};
use effitest_core::randomness::{self, AcfMode, RunsReference};
use effitest_core::report::config::AnalysisConfig;
use effitest_core::report::{run_analysis, run_and_write};
use effitest_core::sim::{self, GeneratorKind, GeneratorSpec, TestKind};
use effitest_core::stats::{describe as core_describe, jarque_bera as core_jb};
use effitest_core::unitroot::{adf_test, default_lag, AdfModel, AdfTarget};
use effitest_core::{compute_returns, TradingDate};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

fn err(e: effitest_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

fn value_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any().unbind(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any().unbind(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(value_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, value_to_py(py, item)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn parse_dates(dates: &[String]) -> PyResult<Vec<TradingDate>> {
    dates.iter().map(|d| d.parse::<TradingDate>().map_err(err)).collect()
}

/// Dated price series, strictly increasing dates and positive prices.
#[pyclass(name = "PriceSeries", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPriceSeries {
    inner: effitest_core::PriceSeries,
}

#[pymethods]
impl PyPriceSeries {
    #[new]
    fn new(index_name: &str, dates: Vec<String>, prices: Vec<f64>) -> PyResult<Self> {
        if dates.len() != prices.len() {
            return Err(PyValueError::new_err("dates and prices differ in length"));
        }
        let obs = parse_dates(&dates)?.into_iter().zip(prices).collect();
        let inner = effitest_core::PriceSeries::new(index_name, obs).map_err(err)?;
        Ok(PyPriceSeries { inner })
    }

    #[getter]
    fn index_name(&self) -> String {
        self.inner.index_name().to_string()
    }

    #[getter]
    fn dates(&self) -> Vec<String> {
        self.inner.dates().iter().map(|d| d.to_string()).collect()
    }

    #[getter]
    fn prices(&self) -> Vec<f64> {
        self.inner.prices().to_vec()
    }

    fn returns(&self) -> PyResult<PyReturnSeries> {
        let inner = compute_returns(&self.inner).map_err(err)?;
        Ok(PyReturnSeries { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("PriceSeries({:?}, n={})", self.inner.index_name(), self.inner.len())
    }
}

/// Simple daily returns, dated by the later price of each pair.
#[pyclass(name = "ReturnSeries", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyReturnSeries {
    inner: effitest_core::ReturnSeries,
}

#[pymethods]
impl PyReturnSeries {
    #[getter]
    fn index_name(&self) -> String {
        self.inner.index_name().to_string()
    }

    #[getter]
    fn dates(&self) -> Vec<String> {
        self.inner.dates().iter().map(|d| d.to_string()).collect()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.returns().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("ReturnSeries({:?}, n={})", self.inner.index_name(), self.inner.len())
    }
}

/// Parse CSV text; returns `(PriceSeries, ingest_report_dict)`.
#[pyfunction]
#[pyo3(signature = (text, index_name, date_column = None, price_column = None, date_format = None, decimal_separator = None, delimiter = None))]
#[allow(clippy::too_many_arguments)]
fn read_prices_csv(
    py: Python<'_>,
    text: &str,
    index_name: &str,
    date_column: Option<String>,
    price_column: Option<String>,
    date_format: Option<String>,
    decimal_separator: Option<char>,
    delimiter: Option<char>,
) -> PyResult<(PyPriceSeries, Py<PyAny>)> {
    let mut schema = CsvSchema::default();
    if let Some(c) = date_column {
        schema.date_column = c;
    }
    if let Some(c) = price_column {
        schema.price_column = c;
        schema.price_fallback = None;
    }
    if let Some(f) = date_format {
        schema.date_format = f;
    }
    if let Some(c) = decimal_separator {
        schema.decimal_separator = c;
    }
    if let Some(c) = delimiter {
        schema.delimiter = c;
    }
    let (series, report) = parse_price_csv(text.as_bytes(), &schema, index_name).map_err(err)?;
    Ok((PyPriceSeries { inner: series }, to_py(py, &report)?))
}

/// Moments plus the Jarque-Bera test.
#[pyfunction]
fn describe(py: Python<'_>, values: Vec<f64>) -> PyResult<Py<PyAny>> {
    let stats = core_describe(&values).map_err(err)?;
    let jb = core_jb(&stats);
    let dict = PyDict::new(py);
    dict.set_item("stats", to_py(py, &stats)?)?;
    dict.set_item("jarque_bera", to_py(py, &jb)?)?;
    Ok(dict.into_any().unbind())
}

/// Runs test about `"mean"` or `"zero"`.
#[pyfunction]
#[pyo3(signature = (values, reference = "mean"))]
fn runs_test(py: Python<'_>, values: Vec<f64>, reference: &str) -> PyResult<Py<PyAny>> {
    let reference = match reference {
        "mean" => RunsReference::Mean,
        "zero" => RunsReference::Zero,
        other => return Err(PyValueError::new_err(format!("unknown runs reference '{other}'"))),
    };
    to_py(py, &randomness::runs_test_values(&values, reference).map_err(err)?)
}

/// Autocorrelations up to `max_lag` and the Ljung-Box test at `horizon`.
#[pyfunction]
#[pyo3(signature = (values, max_lag = 20, mode = "paper_table", horizon = 20))]
fn acf(py: Python<'_>, values: Vec<f64>, max_lag: usize, mode: &str, horizon: usize) -> PyResult<Py<PyAny>> {
    let mode: AcfMode = mode.parse().map_err(err)?;
    let result = randomness::acf(&values, max_lag, mode).map_err(err)?;
    let lb = randomness::ljung_box(&result, values.len(), horizon).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("acf", to_py(py, &result)?)?;
    dict.set_item("ljung_box", to_py(py, &lb)?)?;
    Ok(dict.into_any().unbind())
}

/// Augmented Dickey-Fuller test; `lags=None` picks the default rule.
#[pyfunction]
#[pyo3(signature = (values, model = "drift_trend", lags = None, target = "returns"))]
fn adf(py: Python<'_>, values: Vec<f64>, model: &str, lags: Option<usize>, target: &str) -> PyResult<Py<PyAny>> {
    let model: AdfModel = model.parse().map_err(err)?;
    let target: AdfTarget = target.parse().map_err(err)?;
    let lags = lags.unwrap_or_else(|| default_lag(values.len()));
    to_py(py, &adf_test(&values, lags, model, target).map_err(err)?)
}

/// Hodrick-Prescott filter; returns `(trend, cycle)`.
#[pyfunction]
#[pyo3(signature = (values, lamb = None, frequency = "daily"))]
fn hp(values: Vec<f64>, lamb: Option<f64>, frequency: &str) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let lambda = match lamb {
        Some(l) => l,
        None => default_lambda(frequency.parse::<Frequency>().map_err(err)?),
    };
    let d = hp_filter(&values, lambda).map_err(err)?;
    Ok((d.trend, d.cycle))
}

/// Forward-fill two series onto their union calendar within the overlap.
#[pyfunction]
fn align_pair(py: Python<'_>, a: &PyPriceSeries, b: &PyPriceSeries) -> PyResult<Py<PyAny>> {
    to_py(py, &align(&a.inner, &b.inner).map_err(err)?)
}

#[pyfunction]
fn correlation(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    pearson(&x, &y).map_err(err)
}

fn generator_spec(kind: &str, n: usize, drift: f64, phi: f64, sigma: f64, seed: u64) -> PyResult<GeneratorSpec> {
    let kind = match kind {
        "random_walk" => GeneratorKind::RandomWalk,
        "ar1" => GeneratorKind::Ar1,
        "iid_gaussian" => GeneratorKind::IidGaussian,
        other => return Err(PyValueError::new_err(format!("unknown generator '{other}'"))),
    };
    Ok(GeneratorSpec::new(kind, n, drift, phi, sigma, seed))
}

/// Seeded synthetic path: `random_walk`, `ar1` or `iid_gaussian`.
#[pyfunction]
#[pyo3(signature = (kind, n, seed, drift = 0.0, phi = 0.0, sigma = 1.0))]
fn generate(kind: &str, n: usize, seed: u64, drift: f64, phi: f64, sigma: f64) -> PyResult<Vec<f64>> {
    sim::generate(&generator_spec(kind, n, drift, phi, sigma, seed)?).map_err(err)
}

/// Rejection rate of `test` at `alpha` over seeded trials.
#[pyfunction]
#[pyo3(signature = (test, kind, n, trials, seed, alpha = 0.05, drift = 0.0, phi = 0.0, sigma = 1.0))]
#[allow(clippy::too_many_arguments)]
fn size_power(
    py: Python<'_>,
    test: &str,
    kind: &str,
    n: usize,
    trials: usize,
    seed: u64,
    alpha: f64,
    drift: f64,
    phi: f64,
    sigma: f64,
) -> PyResult<Py<PyAny>> {
    let test: TestKind = test.parse().map_err(err)?;
    let spec = generator_spec(kind, n, drift, phi, sigma, seed)?;
    let result = py.detach(|| sim::size_power(test, &spec, trials, alpha)).map_err(err)?;
    to_py(py, &result)
}

/// Run a config file; returns the report dict. Writes outputs when `write` is true.
#[pyfunction]
#[pyo3(signature = (config_path, write = false))]
fn analyze(py: Python<'_>, config_path: PathBuf, write: bool) -> PyResult<Py<PyAny>> {
    let cfg = AnalysisConfig::from_file(&config_path).map_err(err)?;
    let analysis = py
        .detach(|| if write { run_and_write(&cfg).map(|(a, _)| a) } else { run_analysis(&cfg) })
        .map_err(err)?;
    to_py(py, &analysis.report)
}

#[pymodule]
fn effitest(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPriceSeries>()?;
    m.add_class::<PyReturnSeries>()?;
    m.add_function(wrap_pyfunction!(read_prices_csv, m)?)?;
    m.add_function(wrap_pyfunction!(describe, m)?)?;
    m.add_function(wrap_pyfunction!(runs_test, m)?)?;
    m.add_function(wrap_pyfunction!(acf, m)?)?;
    m.add_function(wrap_pyfunction!(adf, m)?)?;
    m.add_function(wrap_pyfunction!(hp, m)?)?;
    m.add_function(wrap_pyfunction!(align_pair, m)?)?;
    m.add_function(wrap_pyfunction!(correlation, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(size_power, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    Ok(())
}
