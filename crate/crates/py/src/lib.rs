use num_bigint::BigInt;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use padic_expsum::analysis::{self, DEFAULT_SLOPE_TOLERANCE};
use padic_expsum::enumerate::{self, DEFAULT_BUDGET};
use padic_expsum::expsum::{self, PhaseSpec};
use padic_expsum::hensel::{hensel_param, CurvePoint};
use padic_expsum::{BiPoly, Error};

create_exception!(pyexpsum, ExpSumError, PyValueError);
create_exception!(pyexpsum, ConstantPhaseError, ExpSumError);
create_exception!(pyexpsum, InconclusiveError, ExpSumError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::ConstantOnCurve => ConstantPhaseError::new_err(msg),
        Error::Inconclusive(_) | Error::Precision(_) | Error::DepthExhausted { .. } => {
            InconclusiveError::new_err(msg)
        }
        _ => ExpSumError::new_err(msg),
    }
}

fn json_of<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| ExpSumError::new_err(e.to_string()))
}

/// Integer polynomial in `x` and `y`.
#[pyclass(name = "Poly", module = "pyexpsum", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyPoly {
    inner: BiPoly,
}

#[pymethods]
impl PyPoly {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let inner = text.parse().map_err(to_py)?;
        Ok(Self { inner })
    }

    fn eval(&self, x: BigInt, y: BigInt) -> BigInt {
        self.inner.eval_int(&x, &y)
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.inner.total_degree()
    }

    /// `[(coefficient, i, j), ...]` in canonical order.
    fn terms(&self) -> Vec<(BigInt, u32, u32)> {
        self.inner.terms().map(|(&(i, j), c)| (c.clone(), i, j)).collect()
    }

    fn __add__(&self, other: &PyPoly) -> Self {
        Self { inner: &self.inner + &other.inner }
    }

    fn __sub__(&self, other: &PyPoly) -> Self {
        Self { inner: &self.inner - &other.inner }
    }

    fn __mul__(&self, other: &PyPoly) -> Self {
        Self { inner: &self.inner * &other.inner }
    }

    fn __eq__(&self, other: &PyPoly) -> bool {
        self.inner == other.inner
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly('{}')", self.inner)
    }
}

#[derive(FromPyObject)]
enum PolyArg {
    Poly(PyPoly),
    Text(String),
}

impl PolyArg {
    fn get(self) -> PyResult<BiPoly> {
        match self {
            PolyArg::Poly(p) => Ok(p.inner),
            PolyArg::Text(s) => s.parse().map_err(to_py),
        }
    }
}

/// One exponential sum at one level.
#[pyclass(name = "SumRecord", module = "pyexpsum", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PySumRecord {
    #[pyo3(get)]
    p: u64,
    #[pyo3(get)]
    m: u32,
    #[pyo3(get)]
    u: u64,
    #[pyo3(get)]
    magnitude: f64,
    #[pyo3(get)]
    point_count: u64,
    #[pyo3(get)]
    value: Complex64,
    inner: expsum::SumRecord,
}

impl From<expsum::SumRecord> for PySumRecord {
    fn from(r: expsum::SumRecord) -> Self {
        Self {
            p: r.p,
            m: r.m,
            u: r.u,
            magnitude: r.magnitude,
            point_count: r.point_count,
            value: r.value(),
            inner: r,
        }
    }
}

#[pymethods]
impl PySumRecord {
    fn to_json(&self) -> PyResult<String> {
        json_of(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "SumRecord(p={}, m={}, u={}, magnitude={}, point_count={})",
            self.p, self.m, self.u, self.magnitude, self.point_count
        )
    }
}

/// `σ_f(g)` with its witnesses.
#[pyclass(name = "Sigma", module = "pyexpsum", frozen)]
pub struct PySigma {
    inner: analysis::SigmaCertificate,
}

#[pymethods]
impl PySigma {
    #[getter]
    fn sigma(&self) -> u32 {
        self.inner.sigma
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    #[getter]
    fn certified(&self) -> bool {
        self.inner.confidence == analysis::Confidence::Certified
    }

    /// `[(x, y, mu, v_c0), ...]` with coordinates as residues at the witness level.
    #[getter]
    fn witnesses(&self) -> Vec<(BigInt, BigInt, u32, u32)> {
        self.inner
            .witnesses
            .iter()
            .map(|w| {
                let (x, y) = w.point.coords();
                (x, y, w.mu, w.v_c0)
            })
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        json_of(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Sigma(sigma={}, witnesses={})", self.inner.sigma, self.inner.witnesses.len())
    }
}

#[pyclass(name = "DecayReport", module = "pyexpsum", frozen)]
pub struct PyDecayReport {
    inner: analysis::DecayReport,
}

#[pymethods]
impl PyDecayReport {
    #[getter]
    fn fitted_slope(&self) -> Option<f64> {
        self.inner.fitted_slope
    }

    #[getter]
    fn predicted_exponent(&self) -> f64 {
        self.inner.predicted_exponent
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.verdict == analysis::Verdict::Pass
    }

    #[getter]
    fn trivially_zero(&self) -> bool {
        self.inner.trivially_zero
    }

    fn bound_holds(&self) -> bool {
        self.inner.bound_holds()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn to_json(&self) -> PyResult<String> {
        json_of(&self.inner)
    }
}

/// Points of `f = 0` in `(Z/p^m)^2`, sorted.
#[pyfunction]
#[pyo3(signature = (f, p, m, method = "lift", budget = DEFAULT_BUDGET))]
fn points(f: PolyArg, p: u64, m: u32, method: &str, budget: u128) -> PyResult<Vec<(u64, u64)>> {
    let f = f.get()?;
    let set = match method {
        "lift" | "auto" => enumerate::lift_points(&f, p, m),
        "brute" => enumerate::brute_points(&f, p, m, budget),
        other => return Err(ExpSumError::new_err(format!("unknown method {other:?}"))),
    }
    .map_err(to_py)?;
    Ok(set.points().to_vec())
}

#[pyfunction]
#[pyo3(signature = (f, g, p, m, u = 1))]
fn exp_sum(f: PolyArg, g: PolyArg, p: u64, m: u32, u: i64) -> PyResult<PySumRecord> {
    let (f, g) = (f.get()?, g.get()?);
    let phase = PhaseSpec::new(p, m, u).map_err(to_py)?;
    let pts = enumerate::lift_points(&f, p, m).map_err(to_py)?;
    Ok(expsum::sum_curve(&f, &g, &phase, &pts).map_err(to_py)?.into())
}

/// `Σ_{x mod p^m} Ψ(u·f(x)/p^m)` for a polynomial in `x` alone.
#[pyfunction]
#[pyo3(signature = (f, p, m, u = 1))]
fn exp_sum_onevar(f: PolyArg, p: u64, m: u32, u: i64) -> PyResult<PySumRecord> {
    let f = f.get()?;
    let phase = PhaseSpec::new(p, m, u).map_err(to_py)?;
    Ok(expsum::sum_onevar(&f, &phase).map_err(to_py)?.into())
}

#[pyfunction]
#[pyo3(signature = (f, g, p, depth = analysis::DEFAULT_DEPTH))]
fn sigma(f: PolyArg, g: PolyArg, p: u64, depth: u32) -> PyResult<PySigma> {
    let (f, g) = (f.get()?, g.get()?);
    let inner = analysis::sigma_fg(&f, &g, p, depth).map_err(to_py)?;
    Ok(PySigma { inner })
}

#[pyfunction]
#[pyo3(signature = (f, p, depth = analysis::DEFAULT_DEPTH))]
fn sigma_onevar(f: PolyArg, p: u64, depth: u32) -> PyResult<PySigma> {
    let inner = analysis::sigma_onevar(&f.get()?, p, depth).map_err(to_py)?;
    Ok(PySigma { inner })
}

/// `(mu, v_c0)` at the point `(x, y)`, which must lie on `f` mod `p`.
#[pyfunction]
fn mu(f: PolyArg, g: PolyArg, x: BigInt, y: BigInt, p: u64) -> PyResult<(u32, u32)> {
    let (f, g) = (f.get()?, g.get()?);
    let pt = CurvePoint::new(&f, x, y, p, 1).map_err(to_py)?;
    let v = analysis::mu_at_point(&f, &g, &pt).map_err(to_py)?;
    Ok((v.mu, v.v_c0))
}

/// Coefficients of the local branch through `(x, y)`, lowest order first.
#[pyfunction]
#[pyo3(signature = (f, x, y, p, order = 10, precision = 20))]
fn param(f: PolyArg, x: BigInt, y: BigInt, p: u64, order: usize, precision: u32) -> PyResult<Vec<BigInt>> {
    let f = f.get()?;
    let anchor = CurvePoint::new(&f, x, y, p, 1).map_err(to_py)?;
    let branch = hensel_param(&f, &anchor, order, precision).map_err(to_py)?;
    Ok(branch.series.signed_coeffs())
}

#[pyfunction]
#[pyo3(signature = (records, sigma, tolerance = DEFAULT_SLOPE_TOLERANCE))]
fn decay_fit(records: Vec<PyRef<'_, PySumRecord>>, sigma: u32, tolerance: f64) -> PyResult<PyDecayReport> {
    let records: Vec<_> = records.iter().map(|r| r.inner.clone()).collect();
    let inner = analysis::decay_fit(&records, sigma, tolerance).map_err(to_py)?;
    Ok(PyDecayReport { inner })
}

#[pymodule]
fn pyexpsum(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("ExpSumError", py.get_type::<ExpSumError>())?;
    m.add("ConstantPhaseError", py.get_type::<ConstantPhaseError>())?;
    m.add("InconclusiveError", py.get_type::<InconclusiveError>())?;
    m.add_class::<PyPoly>()?;
    m.add_class::<PySumRecord>()?;
    m.add_class::<PySigma>()?;
    m.add_class::<PyDecayReport>()?;
    m.add_function(wrap_pyfunction!(points, m)?)?;
    m.add_function(wrap_pyfunction!(exp_sum, m)?)?;
    m.add_function(wrap_pyfunction!(exp_sum_onevar, m)?)?;
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_onevar, m)?)?;
    m.add_function(wrap_pyfunction!(mu, m)?)?;
    m.add_function(wrap_pyfunction!(param, m)?)?;
    m.add_function(wrap_pyfunction!(decay_fit, m)?)?;
    Ok(())
}
