//! Python bindings.
//!
//! Rationals come back as `fractions.Fraction`. On input, `Fraction`, `int`
//! and strings such as `"7/18"` are accepted; floats are refused. Structured
//! results (verdicts, orbit tables, certificates) are returned as plain
//! dicts built from the same JSON the CLI writes.

use pyo3::exceptions::{PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyFloat, PyString};
use serde::Serialize;

use plzig::dynamics::{is_leo_auto, leo_uniform_n, markov_partition, post_critical_orbits};
use plzig::factorize::transform_point;
use plzig::rational::{format_rational, parse_rational};
use plzig::zigzag::ZigzagAnalyzer;
use plzig::{BackwardOrbit, Extremum, Rational};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

pub fn rational_from(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    if obj.is_instance_of::<PyFloat>() {
        return Err(PyTypeError::new_err("floats are not exact; pass a Fraction, an int or a \"p/q\" string"));
    }
    let text = obj.str()?;
    parse_rational(text.to_str()?).map_err(value_err)
}

fn fraction<'py>(py: Python<'py>, x: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((format_rational(x),))
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn mode(strict: bool) -> Extremum {
    if strict {
        Extremum::Strict
    } else {
        Extremum::NonStrict
    }
}

/// `"const:q"`, an orbit text `"prefix: … ; period: …"`, or a
/// `(prefix, period)` pair of sequences.
fn orbit_from(obj: &Bound<'_, PyAny>) -> PyResult<BackwardOrbit> {
    if let Ok(s) = obj.cast::<PyString>() {
        let s = s.to_str()?;
        let parsed =
            if s.trim_start().starts_with("const:") { BackwardOrbit::parse_spec(s) } else { BackwardOrbit::parse(s) };
        return parsed.map_err(value_err);
    }
    let seq = |o: Bound<'_, PyAny>| -> PyResult<Vec<Rational>> {
        o.try_iter()?.map(|x| rational_from(&x?)).collect()
    };
    let prefix = seq(obj.get_item(0)?)?;
    let period = seq(obj.get_item(1)?)?;
    BackwardOrbit::new(prefix, period).map_err(value_err)
}

/// A continuous piecewise-linear map of `[0,1]` with rational breakpoints.
#[pyclass(name = "PLMap", module = "plzig", frozen, eq)]
#[derive(PartialEq)]
pub struct PyPLMap {
    inner: plzig::PLMap,
}

#[pymethods]
impl PyPLMap {
    /// `PLMap([(x0, y0), (x1, y1), …])` with `x0 = 0` and last `x = 1`.
    #[new]
    fn new(points: &Bound<'_, PyAny>) -> PyResult<Self> {
        let mut pts = Vec::new();
        for item in points.try_iter()? {
            let item = item?;
            pts.push((rational_from(&item.get_item(0)?)?, rational_from(&item.get_item(1)?)?));
        }
        plzig::PLMap::new(pts).map(|inner| PyPLMap { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        plzig::PLMap::from_map_file(text).map(|inner| PyPLMap { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn identity() -> Self {
        PyPLMap { inner: plzig::PLMap::identity() }
    }

    #[staticmethod]
    fn minc() -> Self {
        PyPLMap { inner: plzig::minc_map() }
    }

    fn to_text(&self) -> String {
        self.inner.to_map_file()
    }

    fn __call__<'py>(&self, py: Python<'py>, x: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.eval(&rational_from(x)?).map_err(value_err)?)
    }

    fn breakpoints<'py>(&self, py: Python<'py>) -> PyResult<Vec<(Bound<'py, PyAny>, Bound<'py, PyAny>)>> {
        self.inner.breakpoints().iter().map(|b| Ok((fraction(py, &b.x)?, fraction(py, &b.y)?))).collect()
    }

    /// Interior turning points.
    fn critical_points<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        self.inner.critical_points(false).iter().map(|c| fraction(py, c)).collect()
    }

    fn is_onto(&self) -> bool {
        self.inner.is_onto()
    }

    /// `self∘inner`.
    fn compose(&self, inner: &PyPLMap) -> PyPLMap {
        PyPLMap { inner: plzig::compose(&self.inner, &inner.inner) }
    }

    fn iterate(&self, n: usize) -> PyResult<PyPLMap> {
        plzig::iterate(&self.inner, n).map(|inner| PyPLMap { inner }).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("PLMap({})", self.inner)
    }
}

/// An accessibility certificate.
#[pyclass(name = "Certificate", module = "plzig", frozen)]
pub struct PyCertificate {
    inner: plzig::Certificate,
}

#[pymethods]
impl PyCertificate {
    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed()
    }

    #[getter]
    fn result<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.result)
    }

    #[getter]
    fn stages(&self) -> usize {
        self.inner.stages.len()
    }

    #[getter]
    fn repeat_index(&self) -> Option<usize> {
        self.inner.repeat_index
    }

    /// Re-checks every stage from the stored data; raises `ValueError`.
    fn verify(&self) -> PyResult<()> {
        self.inner.verify().map_err(value_err)
    }

    /// Coordinates of the certified point in the new representation.
    fn coordinates<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let xs = transform_point(&self.inner.orbit, &self.inner).map_err(value_err)?;
        xs.iter().map(|x| fraction(py, x)).collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        plzig::Certificate::from_json(text).map(|inner| PyCertificate { inner }).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        let status = if self.inner.passed() { "pass" } else { "fail" };
        format!("Certificate({:?}, {} stages, {status})", self.inner.pipeline, self.inner.stages.len())
    }
}

/// `outer∘inner`.
#[pyfunction]
fn compose(outer: &PyPLMap, inner: &PyPLMap) -> PyPLMap {
    outer.compose(inner)
}

#[pyfunction]
fn iterate(f: &PyPLMap, n: usize) -> PyResult<PyPLMap> {
    f.iterate(n)
}

#[pyfunction]
#[pyo3(signature = (f, y, strict = true))]
fn is_in_zigzag(f: &PyPLMap, y: &Bound<'_, PyAny>, strict: bool) -> PyResult<bool> {
    let zz = ZigzagAnalyzer::with_mode(&f.inner, mode(strict));
    Ok(zz.verdict(&rational_from(y)?).map_err(value_err)?.in_zigzag)
}

/// The verdict with its evidence: applicable laps, witnesses, failing lap.
#[pyfunction]
#[pyo3(signature = (f, y, strict = true))]
fn zigzag_verdict<'py>(py: Python<'py>, f: &PyPLMap, y: &Bound<'py, PyAny>, strict: bool) -> PyResult<Bound<'py, PyAny>> {
    let zz = ZigzagAnalyzer::with_mode(&f.inner, mode(strict));
    to_py(py, &zz.verdict(&rational_from(y)?).map_err(value_err)?)
}

/// Open intervals making up the zigzag set.
#[pyfunction]
#[pyo3(signature = (f, strict = true))]
fn zigzag_set<'py>(
    py: Python<'py>,
    f: &PyPLMap,
    strict: bool,
) -> PyResult<Vec<(Bound<'py, PyAny>, Bound<'py, PyAny>)>> {
    let zz = ZigzagAnalyzer::with_mode(&f.inner, mode(strict));
    zz.zigzag_set().iter().map(|iv| Ok((fraction(py, &iv.lo)?, fraction(py, &iv.hi)?))).collect()
}

#[pyfunction]
fn branch<'py>(py: Python<'py>, f: &PyPLMap, y: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &plzig::branch(&f.inner, &rational_from(y)?).map_err(value_err)?)
}

#[pyfunction]
fn post_critical<'py>(py: Python<'py>, f: &PyPLMap) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &post_critical_orbits(&f.inner))
}

#[pyfunction]
fn markov<'py>(py: Python<'py>, f: &PyPLMap) -> PyResult<Option<Vec<Bound<'py, PyAny>>>> {
    markov_partition(&f.inner).map(|p| p.iter().map(|x| fraction(py, x)).collect()).transpose()
}

/// `"yes"`, `"no"` or `"indeterminate"`.
#[pyfunction]
fn is_leo<'py>(py: Python<'py>, f: &PyPLMap) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &is_leo_auto(&f.inner))
}

/// Least `N` with every window of length `eps` covering `[0,1]` under `f^N`.
#[pyfunction]
fn uniform_n(f: &PyPLMap, eps: &Bound<'_, PyAny>) -> PyResult<usize> {
    leo_uniform_n(&f.inner, &rational_from(eps)?).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (orbit, stages = 10))]
fn certify_minc(orbit: &Bound<'_, PyAny>, stages: usize) -> PyResult<PyCertificate> {
    let orbit = orbit_from(orbit)?;
    plzig::certify_minc(&orbit, stages).map(|inner| PyCertificate { inner }).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (f, orbit, stages = 4))]
fn certify_general(f: &PyPLMap, orbit: &Bound<'_, PyAny>, stages: usize) -> PyResult<PyCertificate> {
    let orbit = orbit_from(orbit)?;
    plzig::certify_general(&f.inner, &orbit, stages).map(|inner| PyCertificate { inner }).map_err(value_err)
}

#[pymodule]
#[pyo3(name = "plzig")]
fn plzig_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPLMap>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(compose, m)?)?;
    m.add_function(wrap_pyfunction!(iterate, m)?)?;
    m.add_function(wrap_pyfunction!(is_in_zigzag, m)?)?;
    m.add_function(wrap_pyfunction!(zigzag_verdict, m)?)?;
    m.add_function(wrap_pyfunction!(zigzag_set, m)?)?;
    m.add_function(wrap_pyfunction!(branch, m)?)?;
    m.add_function(wrap_pyfunction!(post_critical, m)?)?;
    m.add_function(wrap_pyfunction!(markov, m)?)?;
    m.add_function(wrap_pyfunction!(is_leo, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_n, m)?)?;
    m.add_function(wrap_pyfunction!(certify_minc, m)?)?;
    m.add_function(wrap_pyfunction!(certify_general, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use plzig::rational::rat;

    #[test]
    fn conversions() {
        Python::initialize();
        Python::attach(|py| {
            let half = fraction(py, &rat(1, 2)).unwrap();
            assert_eq!(half.str().unwrap().to_str().unwrap(), "1/2");
            assert_eq!(rational_from(&half).unwrap(), rat(1, 2));
            assert_eq!(rational_from(&3i64.into_pyobject(py).unwrap()).unwrap(), rat(3, 1));
            assert!(rational_from(&0.5f64.into_pyobject(py).unwrap()).is_err());
            let o = orbit_from(&PyString::new(py, "const:1/2").into_any()).unwrap();
            assert_eq!(o.get(3), &rat(1, 2));
        });
    }

    #[test]
    fn module_functions() {
        Python::initialize();
        Python::attach(|py| {
            let f = PyPLMap::minc();
            let y = PyString::new(py, "1/2").into_any();
            assert!(is_in_zigzag(&f, &y, true).unwrap());
            let g = f.iterate(2).unwrap();
            assert_eq!(g.__len__(), 22);
            let cert = certify_minc(&PyString::new(py, "const:1/2").into_any(), 10).unwrap();
            assert!(cert.passed());
            cert.verify().unwrap();
            let back = PyCertificate::from_json(&cert.to_json()).unwrap();
            assert_eq!(back.stages(), 10);
        });
    }
}
