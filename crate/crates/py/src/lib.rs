//! Python bindings: bound calculators, qTB construction, exact distance and decoding trials.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use qlrc::bounds;
use qlrc::classical::DEFAULT_CAP;
use qlrc::css::{css_distance_brute, PauliError};
use qlrc::ensembles::trial_rng;
use qlrc::qtb::{fqtb_from, qtb_dim as core_qtb_dim, qtb_new, FqtbCode};
use qlrc::qtbdec::quantum_decode;

create_exception!(qlrc_py, QlrcError, PyException);
create_exception!(qlrc_py, CapExceeded, QlrcError);

fn err(e: qlrc::Error) -> PyErr {
    match e {
        qlrc::Error::CapExceeded { .. } => CapExceeded::new_err(e.to_string()),
        other => QlrcError::new_err(other.to_string()),
    }
}

#[pyfunction]
pub fn qtb_dim(q: u64, r: usize, ell: usize) -> PyResult<usize> {
    core_qtb_dim(q, r, ell).map_err(err)
}

#[pyfunction]
pub fn qtb_distance_lower(q: u64, r: usize, ell: usize) -> PyResult<f64> {
    bounds::qtb_distance_lower(q, r, ell).map(|s| s.to_f64()).map_err(err)
}

#[pyfunction]
pub fn qtb_distance_upper(q: u64, r: usize, ell: usize) -> PyResult<f64> {
    use num_traits::ToPrimitive;
    bounds::qtb_distance_upper(q, r, ell).map(|x| x.to_f64().unwrap_or(f64::NAN)).map_err(err)
}

#[pyfunction]
pub fn decode_radius_qtb(q: u64, r: usize, ell: usize) -> PyResult<i64> {
    bounds::decode_radius_qtb(q, r, ell).map_err(err)
}

#[pyfunction]
pub fn fqtb_distance_lower(q: u64, r: usize, ell: usize, s: usize) -> PyResult<f64> {
    use num_traits::ToPrimitive;
    bounds::fqtb_distance_lower(q, r, ell, s).map(|x| x.to_f64().unwrap_or(f64::NAN)).map_err(err)
}

#[pyfunction]
pub fn decode_radius_fqtb(q: u64, r: usize, ell: usize, s: usize) -> PyResult<i64> {
    bounds::decode_radius_fqtb(q, r, ell, s).map_err(err)
}

#[pyfunction]
pub fn uncertainty_holds(q: u64, r: usize) -> PyResult<bool> {
    bounds::uncertainty_holds(q, r).map_err(err)
}

#[pyfunction]
pub fn singleton_partition_cap(n: usize, k: usize, r: usize) -> usize {
    bounds::singleton_partition_cap(n, k, r)
}

/// A (folded) quantum Tamo-Barg code; s = 1 is unfolded.
#[pyclass(frozen)]
pub struct QtbCode {
    inner: FqtbCode,
}

#[pymethods]
impl QtbCode {
    #[new]
    #[pyo3(signature = (q, r, ell, s = 1))]
    pub fn new(q: u64, r: usize, ell: usize, s: usize) -> PyResult<Self> {
        let base = qtb_new(q, r, ell).map_err(err)?;
        Ok(QtbCode { inner: fqtb_from(base, s).map_err(err)? })
    }

    #[getter]
    pub fn n(&self) -> usize {
        self.inner.base().n()
    }

    #[getter]
    pub fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    pub fn s(&self) -> usize {
        self.inner.s()
    }

    /// Code descriptor as a JSON string.
    pub fn descriptor(&self) -> String {
        serde_json::to_string(&self.inner.descriptor()).expect("descriptor serializes")
    }

    /// Rows of a generator matrix of C.
    pub fn generator(&self) -> Vec<Vec<u32>> {
        self.inner.base().classical().basis().to_rows()
    }

    /// Exact distance (in blocks when folded) by enumeration.
    #[pyo3(signature = (cap = DEFAULT_CAP))]
    pub fn distance(&self, cap: u128) -> PyResult<usize> {
        css_distance_brute(self.inner.css(), cap).map_err(err)
    }

    /// Decodes the Pauli error (bx, bz) at radius e; True when the residual is a stabilizer.
    pub fn decode(&self, bx: Vec<u32>, bz: Vec<u32>, e: usize) -> PyResult<bool> {
        let n = self.n();
        if bx.len() != n || bz.len() != n {
            return Err(QlrcError::new_err(format!("error vectors must have length {n}")));
        }
        let out = quantum_decode(&self.inner, &PauliError { bx, bz }, e).map_err(err)?;
        Ok(out.logical_identity)
    }

    /// Seeded trials with uniform nonidentity Paulis on `weight` random blocks; returns successes.
    #[pyo3(signature = (weight, trials, seed = 0, e = None))]
    pub fn simulate(&self, py: Python<'_>, weight: usize, trials: u64, seed: u64, e: Option<usize>) -> PyResult<u64> {
        let e = e.unwrap_or(weight);
        let code = &self.inner;
        let s = code.s();
        let blocks = code.base().n() / s;
        if weight > blocks {
            return Err(QlrcError::new_err(format!("weight {weight} exceeds {blocks} blocks")));
        }
        Ok(py.detach(|| {
            let f = code.css().ctx();
            (0..trials)
                .filter(|&t| {
                    let mut rng = trial_rng(seed, t);
                    let hit = rand::seq::index::sample(&mut rng, blocks, weight).into_vec();
                    let pos: Vec<usize> = hit.iter().flat_map(|&b| b * s..(b + 1) * s).collect();
                    let err = PauliError::random_on(f, code.base().n(), &pos, &mut rng);
                    quantum_decode(code, &err, e).is_ok_and(|o| o.logical_identity)
                })
                .count() as u64
        }))
    }
}

#[pymodule]
fn qlrc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QlrcError", m.py().get_type::<QlrcError>())?;
    m.add("CapExceeded", m.py().get_type::<CapExceeded>())?;
    m.add_class::<QtbCode>()?;
    m.add_function(wrap_pyfunction!(qtb_dim, m)?)?;
    m.add_function(wrap_pyfunction!(qtb_distance_lower, m)?)?;
    m.add_function(wrap_pyfunction!(qtb_distance_upper, m)?)?;
    m.add_function(wrap_pyfunction!(decode_radius_qtb, m)?)?;
    m.add_function(wrap_pyfunction!(fqtb_distance_lower, m)?)?;
    m.add_function(wrap_pyfunction!(decode_radius_fqtb, m)?)?;
    m.add_function(wrap_pyfunction!(uncertainty_holds, m)?)?;
    m.add_function(wrap_pyfunction!(singleton_partition_cap, m)?)?;
    Ok(())
}
