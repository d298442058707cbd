use num_complex::Complex64;
use qmarkov_py::{matrix_from_rows, rows_from_matrix, to_py_err};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn rows_round_trip() {
    let rows = vec![vec![c(0.5, 0.0), c(0.1, -0.2)], vec![c(0.1, 0.2), c(0.5, 0.0)]];
    let m = matrix_from_rows(&rows).unwrap();
    assert_eq!((m.nrows(), m.ncols()), (2, 2));
    assert_eq!(m[(0, 1)], c(0.1, -0.2));
    assert_eq!(rows_from_matrix(&m), rows);
}

#[test]
fn ragged_and_empty_rows_are_rejected() {
    let ragged = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0)]];
    assert!(matrix_from_rows(&ragged).is_err());
    assert!(matrix_from_rows(&[]).is_err());
}

#[test]
fn errors_carry_their_code() {
    pyo3::Python::initialize();
    let err = qmarkov::linalg::QuantumState::new(qmarkov::linalg::identity(2), vec![2]).unwrap_err();
    let code = err.code();
    let py_err = to_py_err(err);
    pyo3::Python::attach(|py| {
        assert!(py_err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let msg = py_err.value(py).to_string();
        assert!(msg.starts_with(&format!("[{code}]")), "{msg}");
    });
}
