//! Python bindings for `qmarkov`.
//!
//! Matrices cross the boundary as nested lists of Python complex numbers
//! (floats and numpy scalars are accepted). Reports come back as plain dicts
//! with the same fields as the CLI JSON.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use qmarkov::channels::{is_tpcp, KrausChannel, TP_TOL};
use qmarkov::entropy::{self, LogBase, MeasuredOpts};
use qmarkov::generators::{self, Stream};
use qmarkov::linalg::{self, CMat, QuantumState};
use qmarkov::quad;
use qmarkov::recovery::{self, RecoveryMap, RecoveryMode};
use qmarkov::traceineq::{self as ti, KleinFn};

pub type Rows = Vec<Vec<Complex64>>;

/// `ValueError("[CODE] message")`.
pub fn to_py_err(e: qmarkov::Error) -> PyErr {
    PyValueError::new_err(format!("[{}] {e}", e.code()))
}

fn wrap<T>(r: qmarkov::Result<T>) -> PyResult<T> {
    r.map_err(to_py_err)
}

/// Square or rectangular matrix from rows; rejects ragged input.
pub fn matrix_from_rows(rows: &[Vec<Complex64>]) -> qmarkov::Result<CMat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(qmarkov::Error::Shape("empty matrix".into()));
    }
    if let Some(i) = rows.iter().position(|row| row.len() != c) {
        return Err(qmarkov::Error::Shape(format!("row {i} has {} entries, expected {c}", rows[i].len())));
    }
    Ok(CMat::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn rows_from_matrix(m: &CMat) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn mats(list: &[Rows]) -> PyResult<Vec<CMat>> {
    list.iter().map(|m| wrap(matrix_from_rows(m))).collect()
}

/// Serializes through JSON so dicts match the CLI output exactly.
fn to_dict<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

fn parse_base(b: &str) -> PyResult<LogBase> {
    wrap(LogBase::parse(b))
}

/// Density operator with a tensor-factor shape.
#[pyclass(name = "State", module = "qmarkov_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyState {
    pub inner: QuantumState,
}

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (matrix, shape=None))]
    fn new(matrix: Rows, shape: Option<Vec<usize>>) -> PyResult<Self> {
        let m = wrap(matrix_from_rows(&matrix))?;
        let shape = shape.unwrap_or_else(|| vec![m.nrows()]);
        Ok(PyState { inner: wrap(QuantumState::new(m, shape))? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape.clone()
    }

    #[getter]
    fn matrix(&self) -> Rows {
        rows_from_matrix(&self.inner.rho)
    }

    fn marginal(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(PyState { inner: wrap(self.inner.marginal(&keep))? })
    }

    /// Von Neumann entropy in nats.
    fn entropy(&self) -> f64 {
        entropy::von_neumann(&self.inner)
    }

    /// `H(A|B)` of a bipartite state.
    fn conditional_entropy(&self) -> PyResult<f64> {
        wrap(entropy::conditional_entropy(&self.inner))
    }

    /// `I(A:C|B)` of a tripartite state.
    fn cmi(&self) -> PyResult<f64> {
        wrap(entropy::cmi(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!("State(shape={:?})", self.inner.shape)
    }
}

/// Channel in Kraus form; construction rejects non-TPCP inputs.
#[pyclass(name = "Channel", module = "qmarkov_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyChannel {
    pub inner: KrausChannel,
}

#[pymethods]
impl PyChannel {
    #[new]
    fn new(kraus: Vec<Rows>) -> PyResult<Self> {
        let ks = mats(&kraus)?;
        let (dout, din) = (ks[0].nrows(), ks[0].ncols());
        let ch = wrap(KrausChannel::new(din, dout, ks))?;
        let v = is_tpcp(&ch, TP_TOL);
        if !v.pass() {
            return Err(to_py_err(qmarkov::Error::NotTpcp(format!("trace-preservation defect {:e}", v.tp_defect))));
        }
        Ok(PyChannel { inner: ch })
    }

    #[staticmethod]
    fn identity(d: usize) -> Self {
        PyChannel { inner: KrausChannel::identity(d) }
    }

    #[getter]
    fn din(&self) -> usize {
        self.inner.din
    }

    #[getter]
    fn dout(&self) -> usize {
        self.inner.dout
    }

    fn apply(&self, x: Rows) -> PyResult<Rows> {
        let m = wrap(matrix_from_rows(&x))?;
        Ok(rows_from_matrix(&wrap(self.inner.forward(&m))?))
    }

    fn adjoint(&self, y: Rows) -> PyResult<Rows> {
        let m = wrap(matrix_from_rows(&y))?;
        Ok(rows_from_matrix(&wrap(self.inner.adjoint(&m))?))
    }

    fn tp_defect(&self) -> f64 {
        self.inner.tp_defect()
    }

    fn __repr__(&self) -> String {
        format!("Channel({} -> {}, {} Kraus operators)", self.inner.din, self.inner.dout, self.inner.kraus.len())
    }
}

#[pyfunction]
fn relative_entropy(rho: Rows, sigma: Rows) -> PyResult<f64> {
    let (r, s) = (wrap(matrix_from_rows(&rho))?, wrap(matrix_from_rows(&sigma))?);
    Ok(wrap(entropy::relative_entropy(&r, &s))?.value)
}

/// Sandwiched Rényi divergence of order `alpha`.
#[pyfunction]
fn renyi(rho: Rows, sigma: Rows, alpha: f64) -> PyResult<f64> {
    let (r, s) = (wrap(matrix_from_rows(&rho))?, wrap(matrix_from_rows(&sigma))?);
    Ok(wrap(entropy::renyi(&r, &s, alpha))?.value)
}

#[pyfunction]
fn dmax(rho: Rows, sigma: Rows) -> PyResult<f64> {
    wrap(entropy::dmax(&wrap(matrix_from_rows(&rho))?, &wrap(matrix_from_rows(&sigma))?))
}

#[pyfunction]
fn dmin(rho: Rows, sigma: Rows) -> PyResult<f64> {
    wrap(entropy::dmin(&wrap(matrix_from_rows(&rho))?, &wrap(matrix_from_rows(&sigma))?))
}

/// Certified lower bound on the measured relative entropy.
#[pyfunction]
fn measured_relative_entropy(rho: Rows, sigma: Rows) -> PyResult<f64> {
    let (r, s) = (wrap(matrix_from_rows(&rho))?, wrap(matrix_from_rows(&sigma))?);
    Ok(wrap(entropy::measured_relative_entropy(&r, &s, MeasuredOpts::default()))?.value)
}

#[pyfunction]
fn fidelity(rho: Rows, sigma: Rows) -> PyResult<f64> {
    wrap(linalg::fidelity(&wrap(matrix_from_rows(&rho))?, &wrap(matrix_from_rows(&sigma))?))
}

#[pyfunction]
fn trace_distance(rho: Rows, sigma: Rows) -> PyResult<f64> {
    wrap(linalg::trace_distance(&wrap(matrix_from_rows(&rho))?, &wrap(matrix_from_rows(&sigma))?))
}

#[pyfunction]
fn beta_density(theta: f64, t: f64) -> PyResult<f64> {
    wrap(quad::beta_density(theta, t))
}

#[pyfunction]
#[pyo3(signature = (h1, h2, tol=ti::TOL_EXACT))]
fn check_gt2(py: Python<'_>, h1: Rows, h2: Rows, tol: f64) -> PyResult<Py<PyAny>> {
    let m = mats(&[h1, h2])?;
    to_dict(py, &wrap(ti::check_gt2(&m[0], &m[1], tol))?)
}

#[pyfunction]
#[pyo3(signature = (h1, h2, tol=ti::TOL_EXACT))]
fn check_peierls(py: Python<'_>, h1: Rows, h2: Rows, tol: f64) -> PyResult<Py<PyAny>> {
    let m = mats(&[h1, h2])?;
    to_dict(py, &wrap(ti::check_peierls(&m[0], &m[1], tol))?)
}

#[pyfunction]
#[pyo3(signature = (hs, p=2.0, tol=ti::TOL_QUAD))]
fn check_gt_multi(py: Python<'_>, hs: Vec<Rows>, p: f64, tol: f64) -> PyResult<Py<PyAny>> {
    to_dict(py, &wrap(ti::check_gt_multi(&mats(&hs)?, p, &quad::beta0_rule(), tol))?)
}

#[pyfunction]
#[pyo3(signature = (b1, b2, q, r, tol=ti::TOL_EXACT))]
fn check_alt2(py: Python<'_>, b1: Rows, b2: Rows, q: f64, r: f64, tol: f64) -> PyResult<Py<PyAny>> {
    let m = mats(&[b1, b2])?;
    to_dict(py, &wrap(ti::check_alt2(&m[0], &m[1], q, r, tol))?)
}

#[pyfunction]
#[pyo3(signature = (b1, b2, p=1.0, tol=ti::TOL_EXACT))]
fn check_log_trace2(py: Python<'_>, b1: Rows, b2: Rows, p: f64, tol: f64) -> PyResult<Py<PyAny>> {
    let m = mats(&[b1, b2])?;
    to_dict(py, &wrap(ti::check_log_trace2(&m[0], &m[1], p, tol))?)
}

/// `f` is one of `"xlogx"`, `"square"`, `"neglog"`.
#[pyfunction]
#[pyo3(signature = (b1, b2, f="xlogx", tol=ti::TOL_EXACT))]
fn check_klein(py: Python<'_>, b1: Rows, b2: Rows, f: &str, tol: f64) -> PyResult<Py<PyAny>> {
    let f = match f {
        "xlogx" => KleinFn::XLogX,
        "square" => KleinFn::Square,
        "neglog" => KleinFn::NegLog,
        other => return Err(PyValueError::new_err(format!("unknown Klein function {other:?}"))),
    };
    let m = mats(&[b1, b2])?;
    to_dict(py, &wrap(ti::check_klein(&m[0], &m[1], f, tol))?)
}

#[pyfunction]
#[pyo3(signature = (state, tol=recovery::TOL_RECOVERY))]
fn fr_check(py: Python<'_>, state: &PyState, tol: f64) -> PyResult<Py<PyAny>> {
    let rep = wrap(recovery::fr_check(&state.inner, &quad::beta0_rule(), MeasuredOpts::default(), tol))?;
    to_dict(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (state, tol=recovery::TOL_INVARIANT))]
fn markov_verify(py: Python<'_>, state: &PyState, tol: f64) -> PyResult<Py<PyAny>> {
    to_dict(py, &wrap(recovery::markov_verify(&state.inner, tol))?)
}

/// Applies the tripartite recovery map (`"petz"`, `"rotated"` or `"averaged"`) to `ρ_AB`.
#[pyfunction]
#[pyo3(signature = (state, mode="averaged", t=0.0))]
fn recover(state: &PyState, mode: &str, t: f64) -> PyResult<PyState> {
    let mode = match mode {
        "petz" => RecoveryMode::Petz,
        "rotated" => RecoveryMode::Rotated(t),
        "averaged" => RecoveryMode::Averaged,
        other => return Err(PyValueError::new_err(format!("unknown recovery mode {other:?}"))),
    };
    let rho = &state.inner;
    let r = wrap(RecoveryMap::tripartite(rho, mode))?;
    let rho_ab = wrap(linalg::partial_trace(&rho.rho, &rho.shape, &[0, 1]))?;
    let out = linalg::hermitian_part(&wrap(r.apply(&rho_ab))?);
    Ok(PyState { inner: wrap(QuantumState::new(out, rho.shape.clone()))? })
}

#[pyfunction]
#[pyo3(signature = (d, rank=None, shape=None, seed=0, stream=0))]
fn random_density(d: usize, rank: Option<usize>, shape: Option<Vec<usize>>, seed: u64, stream: u64) -> PyResult<PyState> {
    let shape = shape.unwrap_or_else(|| vec![d]);
    let total: usize = shape.iter().product();
    let mut s = Stream::new(seed, stream);
    Ok(PyState { inner: wrap(generators::random_density_shaped(&shape, rank.unwrap_or(total), &mut s))? })
}

#[pyfunction]
#[pyo3(signature = (d, seed=0, stream=0))]
fn random_hermitian(d: usize, seed: u64, stream: u64) -> Rows {
    rows_from_matrix(&generators::random_hermitian(d, &mut Stream::new(seed, stream)))
}

#[pyfunction]
#[pyo3(signature = (din, dout, rank=None, seed=0, stream=0))]
fn random_channel(din: usize, dout: usize, rank: Option<usize>, seed: u64, stream: u64) -> PyResult<PyChannel> {
    let mut s = Stream::new(seed, stream);
    Ok(PyChannel { inner: wrap(generators::random_channel(din, dout, rank.unwrap_or(din * dout), &mut s))? })
}

#[pyfunction]
#[pyo3(signature = (n=10, p=0.5, q=0.0, base="2"))]
fn appendix_a(py: Python<'_>, n: u32, p: f64, q: f64, base: &str) -> PyResult<Py<PyAny>> {
    to_dict(py, &wrap(qmarkov::examples::appendix_a_report(n, p, q, parse_base(base)?))?)
}

#[pyfunction]
#[pyo3(signature = (alpha, base="2"))]
fn appendix_b(py: Python<'_>, alpha: u32, base: &str) -> PyResult<Py<PyAny>> {
    to_dict(py, &wrap(qmarkov::examples::appendix_b_report(alpha, parse_base(base)?))?)
}

#[pyfunction]
#[pyo3(signature = (d=3))]
fn slater(py: Python<'_>, d: usize) -> PyResult<Py<PyAny>> {
    to_dict(py, &wrap(qmarkov::examples::slater_cmi(d))?)
}

#[pymodule]
fn qmarkov_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_class::<PyChannel>()?;
    m.add_function(wrap_pyfunction!(relative_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(renyi, m)?)?;
    m.add_function(wrap_pyfunction!(dmax, m)?)?;
    m.add_function(wrap_pyfunction!(dmin, m)?)?;
    m.add_function(wrap_pyfunction!(measured_relative_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(beta_density, m)?)?;
    m.add_function(wrap_pyfunction!(check_gt2, m)?)?;
    m.add_function(wrap_pyfunction!(check_peierls, m)?)?;
    m.add_function(wrap_pyfunction!(check_gt_multi, m)?)?;
    m.add_function(wrap_pyfunction!(check_alt2, m)?)?;
    m.add_function(wrap_pyfunction!(check_log_trace2, m)?)?;
    m.add_function(wrap_pyfunction!(check_klein, m)?)?;
    m.add_function(wrap_pyfunction!(fr_check, m)?)?;
    m.add_function(wrap_pyfunction!(markov_verify, m)?)?;
    m.add_function(wrap_pyfunction!(recover, m)?)?;
    m.add_function(wrap_pyfunction!(random_density, m)?)?;
    m.add_function(wrap_pyfunction!(random_hermitian, m)?)?;
    m.add_function(wrap_pyfunction!(random_channel, m)?)?;
    m.add_function(wrap_pyfunction!(appendix_a, m)?)?;
    m.add_function(wrap_pyfunction!(appendix_b, m)?)?;
    m.add_function(wrap_pyfunction!(slater, m)?)?;
    Ok(())
}
