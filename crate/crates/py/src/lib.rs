//! Python bindings for `dcelab_core`.
//!
//! Rationals cross the boundary as `fractions.Fraction` on the way out and
//! as anything whose `str()` is `"p/q"` or an integer on the way in
//! (`Fraction`, `int`, `str`).
//!
//! ```python
//! import dcelab
//! a = dcelab.Stream.constant_target("1/2", "increasing", "1/2")
//! a.values(3)  # [Fraction(1, 4), Fraction(3, 8), Fraction(7, 16), Fraction(15, 32)]
//! ```

use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyList;

use dcelab_core::config::{EngineKind, RunConfig};
use dcelab_core::dce::{dc_add, dc_mul, dc_neg, dc_sub, DcReal};
use dcelab_core::omega::{bundled, OmegaEnumeration};
use dcelab_core::report::VerificationReport;
use dcelab_core::solovay::{self, Clause, SolovayWitness, Verdict};
use dcelab_core::trace::{engine_name, read_jsonl, to_jsonl, TraceEvent};
use dcelab_core::{lemma2, prop3, ApproxStream, Direction, Rational};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.to_text(),))
}

fn from_py(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = obj.str()?;
    text.to_str()?.parse().map_err(value_err)
}

fn direction(name: &str) -> PyResult<Direction> {
    match name {
        "increasing" | "inc" => Ok(Direction::Increasing),
        "decreasing" | "dec" => Ok(Direction::Decreasing),
        other => Err(PyValueError::new_err(format!(
            "direction must be 'increasing' or 'decreasing', got {other:?}"
        ))),
    }
}

fn clause(name: &str) -> PyResult<Clause> {
    match name.to_ascii_lowercase().as_str() {
        "a" => Ok(Clause::A),
        "b" => Ok(Clause::B),
        "c" => Ok(Clause::C),
        other => Err(PyValueError::new_err(format!(
            "clause must be 'a', 'b' or 'c', got {other:?}"
        ))),
    }
}

/// A monotone stream of rationals approximating a real.
#[pyclass(name = "Stream", module = "dcelab")]
struct PyStream {
    inner: ApproxStream,
}

#[pymethods]
impl PyStream {
    #[staticmethod]
    fn constant(value: &Bound<'_, PyAny>, direction: &str) -> PyResult<Self> {
        Ok(PyStream {
            inner: ApproxStream::constant(from_py(value)?, self::direction(direction)?),
        })
    }

    /// Geometric approach to `limit` at the given rate.
    #[staticmethod]
    fn constant_target(limit: &Bound<'_, PyAny>, direction: &str, rate: &Bound<'_, PyAny>) -> PyResult<Self> {
        let inner = ApproxStream::constant_target(from_py(limit)?, self::direction(direction)?, from_py(rate)?)
            .map_err(value_err)?;
        Ok(PyStream { inner })
    }

    #[staticmethod]
    fn table(values: Vec<Bound<'_, PyAny>>, direction: &str) -> PyResult<Self> {
        let values = values.iter().map(from_py).collect::<PyResult<Vec<_>>>()?;
        let inner = ApproxStream::table(values, self::direction(direction)?).map_err(value_err)?;
        Ok(PyStream { inner })
    }

    /// Toy halting probability `ω_s` of a bundled machine.
    #[staticmethod]
    #[pyo3(signature = (machine="default", length=8))]
    fn omega(machine: &str, length: usize) -> PyResult<Self> {
        let m = bundled(machine).map_err(value_err)?;
        let en = OmegaEnumeration::new(m, length).map_err(value_err)?;
        Ok(PyStream {
            inner: ApproxStream::omega(en),
        })
    }

    #[getter]
    fn direction(&self) -> String {
        self.inner.direction().to_string()
    }

    fn value<'py>(&mut self, py: Python<'py>, s: usize) -> PyResult<Bound<'py, PyAny>> {
        let v = self.inner.value(s).map_err(value_err)?;
        to_fraction(py, &v)
    }

    /// Values at stages `0..=t`.
    fn values<'py>(&mut self, py: Python<'py>, t: usize) -> PyResult<Bound<'py, PyList>> {
        let vals = self.inner.materialize(t).map_err(value_err)?.to_vec();
        let items = vals.iter().map(|v| to_fraction(py, v)).collect::<PyResult<Vec<_>>>()?;
        PyList::new(py, items)
    }

    fn __repr__(&self) -> String {
        format!("Stream({}, {})", self.inner.label(), self.inner.direction())
    }
}

/// A difference `left − right` of two increasing streams.
#[pyclass(name = "DcReal", module = "dcelab")]
struct PyDcReal {
    inner: DcReal,
}

#[pymethods]
impl PyDcReal {
    #[new]
    fn new(left: &PyStream, right: &PyStream) -> PyResult<Self> {
        let inner = DcReal::new(left.inner.clone(), right.inner.clone()).map_err(value_err)?;
        Ok(PyDcReal { inner })
    }

    fn value<'py>(&mut self, py: Python<'py>, s: usize) -> PyResult<Bound<'py, PyAny>> {
        let v = self.inner.value_at(s).map_err(value_err)?;
        to_fraction(py, &v)
    }

    fn __add__(&self, other: &PyDcReal) -> Self {
        PyDcReal {
            inner: dc_add(&self.inner, &other.inner),
        }
    }

    fn __sub__(&self, other: &PyDcReal) -> Self {
        PyDcReal {
            inner: dc_sub(&self.inner, &other.inner),
        }
    }

    fn __mul__(&self, other: &PyDcReal) -> Self {
        PyDcReal {
            inner: dc_mul(&self.inner, &other.inner),
        }
    }

    fn __neg__(&self) -> Self {
        PyDcReal {
            inner: dc_neg(&self.inner),
        }
    }
}

/// Outcome of an engine run or of verifying a trace.
#[pyclass(name = "Run", module = "dcelab", get_all)]
struct PyRun {
    engine: String,
    passed: bool,
    /// Line-delimited JSON trace.
    trace: String,
    /// Final state as JSON.
    state: String,
    /// Human-readable verification report.
    report: String,
    report_json: String,
    /// `(check id, stage, message)` of the earliest failure, if any.
    first_failure: Option<(String, Option<u64>, String)>,
}

#[pymethods]
impl PyRun {
    fn __repr__(&self) -> String {
        format!("Run(engine={:?}, passed={})", self.engine, self.passed)
    }
}

fn make_run(engine: &str, trace: &[TraceEvent], state: String, report: &VerificationReport) -> PyResult<PyRun> {
    Ok(PyRun {
        engine: engine.to_string(),
        passed: report.passed(),
        trace: to_jsonl(trace),
        state,
        report: report.to_text(),
        report_json: serde_json::to_string_pretty(report).map_err(value_err)?,
        first_failure: report
            .first_failure()
            .map(|(c, f)| (c.id.clone(), f.stage, f.message.clone())),
    })
}

/// Runs an engine from a JSON configuration (the CLI format) and verifies
/// the trace. Relative machine files resolve against the working directory.
#[pyfunction]
fn run(config: &str) -> PyResult<PyRun> {
    let cfg = RunConfig::from_json(config).map_err(value_err)?;
    let base = Path::new(".");
    match cfg.engine {
        EngineKind::Lemma2 => {
            let out = lemma2::run(cfg.lemma2(base).map_err(value_err)?).map_err(value_err)?;
            make_run(
                lemma2::ENGINE_NAME,
                &out.trace,
                out.state.to_json(),
                &lemma2::verify(&out.trace),
            )
        }
        EngineKind::Prop3 => {
            let out = prop3::run(cfg.prop3(base).map_err(value_err)?).map_err(value_err)?;
            make_run(
                prop3::ENGINE_NAME,
                &out.trace,
                out.state.to_json(),
                &prop3::verify(&out.trace),
            )
        }
    }
}

fn run_engine(config: &str, want: EngineKind) -> PyResult<PyRun> {
    let cfg = RunConfig::from_json(config).map_err(value_err)?;
    if cfg.engine != want {
        return Err(PyValueError::new_err(format!("configuration is for {:?}", cfg.engine)));
    }
    run(config)
}

#[pyfunction]
fn run_lemma2(config: &str) -> PyResult<PyRun> {
    run_engine(config, EngineKind::Lemma2)
}

#[pyfunction]
fn run_prop3(config: &str) -> PyResult<PyRun> {
    run_engine(config, EngineKind::Prop3)
}

/// Verifies a line-delimited JSON trace and replays it.
#[pyfunction]
fn verify_trace(trace: &str) -> PyResult<PyRun> {
    let events = read_jsonl(trace.as_bytes()).map_err(value_err)?;
    match engine_name(&events) {
        Some(lemma2::ENGINE_NAME) => {
            let report = lemma2::verify(&events);
            let state = lemma2::replay(&events).map(|s| s.to_json()).unwrap_or_default();
            make_run(lemma2::ENGINE_NAME, &events, state, &report)
        }
        Some(prop3::ENGINE_NAME) => {
            let report = prop3::verify(&events);
            let state = prop3::replay(&events).map(|s| s.to_json()).unwrap_or_default();
            make_run(prop3::ENGINE_NAME, &events, state, &report)
        }
        other => Err(PyValueError::new_err(format!(
            "unknown engine in trace header: {other:?}"
        ))),
    }
}

/// Final state rebuilt from a trace, as JSON.
#[pyfunction]
fn replay_trace(trace: &str) -> PyResult<String> {
    let events = read_jsonl(trace.as_bytes()).map_err(value_err)?;
    match engine_name(&events) {
        Some(lemma2::ENGINE_NAME) => Ok(lemma2::replay(&events).map_err(value_err)?.to_json()),
        Some(prop3::ENGINE_NAME) => Ok(prop3::replay(&events).map_err(value_err)?.to_json()),
        other => Err(PyValueError::new_err(format!(
            "unknown engine in trace header: {other:?}"
        ))),
    }
}

#[pyfunction]
fn pow2_neg(py: Python<'_>, n: u64) -> PyResult<Bound<'_, PyAny>> {
    to_fraction(py, &Rational::pow2_neg(n))
}

/// The speedup of `alpha` paced by `beta` with factor `p`.
#[pyfunction]
fn speedup(alpha: &PyStream, beta: &PyStream, p: &Bound<'_, PyAny>) -> PyResult<PyStream> {
    let inner = solovay::speedup(alpha.inner.clone(), beta.inner.clone(), from_py(p)?).map_err(value_err)?;
    Ok(PyStream { inner })
}

/// Decides a Solovay clause on stages `0..=stages`. Returns `None` when it
/// holds, else the least failing stage.
#[pyfunction]
#[pyo3(signature = (clause, q, alpha, beta, stages, horizon=None))]
fn check_clause(
    clause: &str,
    q: &Bound<'_, PyAny>,
    alpha: &PyStream,
    beta: &PyStream,
    stages: usize,
    horizon: Option<usize>,
) -> PyResult<Option<usize>> {
    let mut w = SolovayWitness::new(
        from_py(q)?,
        self::clause(clause)?,
        alpha.inner.clone(),
        beta.inner.clone(),
    )
    .map_err(value_err)?;
    match w.check(stages, horizon).map_err(value_err)? {
        Verdict::Holds => Ok(None),
        Verdict::FailsAt(s) => Ok(Some(s)),
    }
}

/// `ω_0, …, ω_stages` for a bundled machine.
#[pyfunction]
#[pyo3(signature = (stages, machine="default", length=8))]
fn enumerate_omega<'py>(py: Python<'py>, stages: usize, machine: &str, length: usize) -> PyResult<Bound<'py, PyList>> {
    let m = bundled(machine).map_err(value_err)?;
    let mut en = OmegaEnumeration::new(m, length).map_err(value_err)?;
    let items = (0..=stages)
        .map(|s| to_fraction(py, &en.value(s).map_err(value_err)?))
        .collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

#[pymodule]
fn dcelab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStream>()?;
    m.add_class::<PyDcReal>()?;
    m.add_class::<PyRun>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_lemma2, m)?)?;
    m.add_function(wrap_pyfunction!(run_prop3, m)?)?;
    m.add_function(wrap_pyfunction!(verify_trace, m)?)?;
    m.add_function(wrap_pyfunction!(replay_trace, m)?)?;
    m.add_function(wrap_pyfunction!(pow2_neg, m)?)?;
    m.add_function(wrap_pyfunction!(speedup, m)?)?;
    m.add_function(wrap_pyfunction!(check_clause, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_omega, m)?)?;
    m.add("BUNDLED_MACHINES", dcelab_core::omega::BUNDLED.to_vec())?;
    Ok(())
}
