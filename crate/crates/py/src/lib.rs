//! Python bindings. Exact values cross the boundary as strings such as
//! `"3/4"` or `"(-1 + 1*sqrt(2))/1"`; structured reports come back as dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ncsol_core::bimodule::{self, Normalization, SamplePlan, SuiteOptions};
use ncsol_core::exactnum::{parse_rat, PFrac, QuadReal};
use ncsol_core::morita::{self, ProjectionData, SearchBounds};
use ncsol_core::multiplier::{self, GammaElem};
use ncsol_core::padic;
use ncsol_core::solenoid::{self, SeqWindow, SolenoidSpec};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(x).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn window_list(w: &SeqWindow) -> Vec<(u64, String)> {
    w.entries().iter().map(|(n, v)| (*n, v.to_string())).collect()
}

fn quad(s: &str) -> PyResult<QuadReal> {
    s.parse().map_err(err)
}

/// A rational p-adic number with its eventually periodic expansion.
#[pyclass(name = "PAdic", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPAdic(padic::PAdic);

#[pymethods]
impl PyPAdic {
    #[new]
    fn new(p: u64, x: &str) -> PyResult<Self> {
        let q = parse_rat(x).map_err(err)?;
        padic::PAdic::from_rational(p, &q).map(PyPAdic).map_err(err)
    }

    #[getter]
    fn p(&self) -> u64 {
        self.0.prime()
    }

    /// Index of the first nonzero digit; `None` for zero.
    #[getter]
    fn ord(&self) -> Option<i64> {
        self.0.ord()
    }

    fn digit(&self, j: i64) -> u64 {
        self.0.digit(j)
    }

    fn inverse(&self) -> PyResult<Self> {
        self.0.invert().map(PyPAdic).map_err(err)
    }

    fn frac_part(&self) -> String {
        self.0.frac_part().to_rat().to_string()
    }

    fn truncate_sum(&self, lo: i64, hi: i64) -> String {
        self.0.truncate_sum(lo, hi).to_rat().to_string()
    }

    fn to_rational(&self) -> String {
        self.0.to_rational().to_string()
    }

    fn __repr__(&self) -> String {
        format!("PAdic(p={}, x={})", self.0.prime(), self.0.to_rational())
    }
}

/// A sequence `alpha_n = (theta + sum_{j<n} x_j p^j) / p^n`.
#[pyclass(name = "Spec", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpec(SolenoidSpec);

#[pymethods]
impl PySpec {
    /// `x` is a rational digit source; `digits` a finite digit list.
    #[new]
    #[pyo3(signature = (p, theta, x = None, digits = None))]
    fn new(p: u64, theta: &str, x: Option<&str>, digits: Option<Vec<u64>>) -> PyResult<Self> {
        let theta = quad(theta)?;
        let spec = match (x, digits) {
            (Some(x), None) => {
                let q = parse_rat(x).map_err(err)?;
                SolenoidSpec::new(p, theta, padic::PAdic::from_rational(p, &q).map_err(err)?)
            }
            (None, Some(ds)) => SolenoidSpec::with_digits(p, theta, ds),
            _ => return Err(PyValueError::new_err("give exactly one of x and digits")),
        };
        spec.map(PySpec).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PySpec).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(err)
    }

    #[getter]
    fn p(&self) -> u64 {
        self.0.prime()
    }

    #[getter]
    fn theta(&self) -> String {
        self.0.theta().to_string()
    }

    fn alpha(&self, n: u64) -> PyResult<String> {
        self.0.alpha_at(n).map(|a| a.to_string()).map_err(err)
    }

    fn alpha_f64(&self, n: u64) -> PyResult<f64> {
        self.0.alpha_at(n).map(|a| a.to_f64()).map_err(err)
    }

    /// `[(n, alpha_n)]` for `n <= n_max`.
    fn window(&self, n_max: u64) -> PyResult<Vec<(u64, String)>> {
        self.0.window(n_max).map(|w| window_list(&w)).map_err(err)
    }

    /// `[(n, alpha_n mod 1)]` for `n <= n_max`.
    fn reduce(&self, n_max: u64) -> PyResult<Vec<(u64, String)>> {
        self.0.reduce_h(n_max).map(|w| window_list(&w)).map_err(err)
    }

    fn equal_in_xi(&self, other: &PySpec, n_max: u64) -> PyResult<bool> {
        solenoid::equal_in_xi(&self.0, &other.0, n_max).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Spec({})", serde_json::to_string(&self.0).unwrap_or_default())
    }
}

fn projection(spec: &SolenoidSpec, c0: i64, d0: i64, m: Option<u64>) -> PyResult<ProjectionData> {
    match m {
        Some(m) => ProjectionData::new(m, c0, d0, spec.theta()).map_err(err),
        None => ProjectionData::minimal(c0, d0, spec.theta())
            .ok_or_else(|| PyValueError::new_err("the trace c0*theta + d0 must be positive")),
    }
}

fn gamma(p: u64, g: (&str, &str)) -> PyResult<GammaElem> {
    let part = |s: &str| -> PyResult<PFrac> { PFrac::from_rat(p, &parse_rat(s).map_err(err)?).map_err(err) };
    GammaElem::new(part(g.0)?, part(g.1)?).map_err(err)
}

/// `gcd(c0 p, d0 - c0 x0) == 1`.
#[pyfunction]
fn condition_check(p: u64, c0: i64, d0: i64, x0: u64) -> bool {
    morita::condition_check(p, &ProjectionData { m: 1, c0, d0 }, x0)
}

/// Closed-form partner entries `[(n, beta_n)]`.
#[pyfunction]
fn heisenberg_partner(spec: &PySpec, n_max: u64) -> PyResult<Vec<(u64, String)>> {
    morita::heisenberg_partner(&spec.0, n_max).map(|w| window_list(&w)).map_err(err)
}

#[pyfunction]
fn heisenberg_partner_spec(spec: &PySpec) -> PyResult<PySpec> {
    morita::heisenberg_partner_spec(&spec.0).map(PySpec).map_err(err)
}

/// Even entries `[(2n, beta_2n)]` of the partner over the projection with trace `c0 theta + d0`.
#[pyfunction]
#[pyo3(signature = (spec, c0, d0, n_max, m = None))]
fn projection_partner(spec: &PySpec, c0: i64, d0: i64, n_max: u64, m: Option<u64>) -> PyResult<Vec<(u64, String)>> {
    let proj = projection(&spec.0, c0, d0, m)?;
    morita::projection_partner(&spec.0, &proj, n_max).map(|w| window_list(&w)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (spec, c0, d0, n_max, m = None))]
fn projection_partner_spec(spec: &PySpec, c0: i64, d0: i64, n_max: u64, m: Option<u64>) -> PyResult<PySpec> {
    let proj = projection(&spec.0, c0, d0, m)?;
    morita::projection_partner_spec(&spec.0, &proj, n_max).map(PySpec).map_err(err)
}

/// Sequence cocycle `Psi(g, h) mod 1` for `g, h` given as pairs of `j/p^k` strings.
#[pyfunction]
fn psi(spec: &PySpec, g: (String, String), h: (String, String)) -> PyResult<String> {
    let p = spec.0.prime();
    let g = gamma(p, (&g.0, &g.1))?;
    let h = gamma(p, (&h.0, &h.1))?;
    multiplier::psi_alpha(&spec.0, &g, &h).map(|v| v.value().fract().to_string()).map_err(err)
}

/// Bounded certificate search; returns `{"outcome": ...}`.
#[pyfunction]
#[pyo3(signature = (a, b, max_c0 = 4, max_d0 = 4, max_k = 4, entries = 16))]
fn certify<'py>(
    py: Python<'py>,
    a: &PySpec,
    b: &PySpec,
    max_c0: u64,
    max_d0: u64,
    max_k: u64,
    entries: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let bounds = SearchBounds {
        max_c0,
        max_d0,
        max_k,
        entries,
    };
    let out = morita::certificate_search(&a.0, &b.0, &bounds).map_err(err)?;
    to_py(py, &out)
}

/// Maximum deviations of the stage-compatibility identities.
#[pyfunction]
#[pyo3(signature = (spec, c0, d0, n, seed = 0, functions = 20, points = 200, normalization = "literal", m = None))]
#[allow(clippy::too_many_arguments)]
fn identity_suite<'py>(
    py: Python<'py>,
    spec: &PySpec,
    c0: i64,
    d0: i64,
    n: u64,
    seed: u64,
    functions: usize,
    points: usize,
    normalization: &str,
    m: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let proj = projection(&spec.0, c0, d0, m)?;
    let normalization = match normalization {
        "literal" => Normalization::Literal,
        "unit" => Normalization::Unit,
        other => return Err(PyValueError::new_err(format!("unknown normalization {other:?}"))),
    };
    let plan = SamplePlan {
        seed,
        functions,
        points,
        ..SamplePlan::default()
    };
    let opts = SuiteOptions {
        normalization,
        ..SuiteOptions::default()
    };
    let rep = py
        .detach(|| bimodule::identity_suite_with(&spec.0, &proj, n, &plan, opts))
        .map_err(err)?;
    to_py(py, &rep)
}

/// Runs the command-line front end; returns `(exit_code, output)`.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> (i32, String) {
    let full = std::iter::once("ncsol".to_string()).chain(args);
    let r = py.detach(|| ncsol_core::cli::run_args(full));
    (r.code, r.output)
}

/// Parses and prints a quadratic irrational in canonical form.
#[pyfunction]
fn canonical(value: &str) -> PyResult<String> {
    quad(value).map(|q| q.to_string())
}

#[pymodule]
fn ncsol(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPAdic>()?;
    m.add_class::<PySpec>()?;
    m.add_function(wrap_pyfunction!(condition_check, m)?)?;
    m.add_function(wrap_pyfunction!(heisenberg_partner, m)?)?;
    m.add_function(wrap_pyfunction!(heisenberg_partner_spec, m)?)?;
    m.add_function(wrap_pyfunction!(projection_partner, m)?)?;
    m.add_function(wrap_pyfunction!(projection_partner_spec, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(identity_suite, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    Ok(())
}
