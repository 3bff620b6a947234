//! Python bindings. Rationals cross the boundary as `fractions.Fraction`
//! (ints are accepted wherever a rational is expected); structured reports
//! come back as plain dicts.

use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use padic_collatz::diagnostics::{self, SampleSpec};
use padic_collatz::dynamics::{self, SearchOptions};
use padic_collatz::fpseries::{self, FpRationalFunction};
use padic_collatz::isometry::{self, PhiExact};
use padic_collatz::padic::rational_from_digits;
use padic_collatz::{Error, HenselDigits};

create_exception!(padic_collatz, PadicCollatzError, PyException);
create_exception!(padic_collatz, BudgetExhaustedError, PadicCollatzError);

fn err(e: Error) -> PyErr {
    match e {
        Error::BudgetExhausted(_) => BudgetExhaustedError::new_err(e.to_string()),
        _ => PadicCollatzError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
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
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn report<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PadicCollatzError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

/// A parameter pair `(p, q)`: `p` prime, `q ≥ 2` prime to `p`.
#[pyclass(frozen, eq, hash, skip_from_py_object, name = "Params", module = "padic_collatz")]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyParams(padic_collatz::Params);

#[pymethods]
impl PyParams {
    #[new]
    fn new(p: u64, q: u64) -> PyResult<Self> {
        padic_collatz::Params::new(p, q).map(PyParams).map_err(err)
    }

    #[staticmethod]
    fn collatz() -> Self {
        PyParams(padic_collatz::Params::collatz())
    }

    #[getter]
    fn p(&self) -> u64 {
        self.0.p()
    }

    #[getter]
    fn q(&self) -> u64 {
        self.0.q()
    }

    fn __repr__(&self) -> String {
        format!("Params(p={}, q={})", self.0.p(), self.0.q())
    }
}

/// The orbit of a seed up to its first repeat or the step budget.
#[pyclass(frozen, name = "Orbit", module = "padic_collatz")]
struct PyOrbit(dynamics::OrbitRecord);

#[pymethods]
impl PyOrbit {
    #[getter]
    fn states(&self) -> Vec<BigRational> {
        self.0.states.clone()
    }

    #[getter]
    fn digits(&self) -> Vec<u32> {
        self.0.digits.clone()
    }

    #[getter]
    fn r(&self) -> Vec<u64> {
        self.0.r.clone()
    }

    #[getter]
    fn truncated(&self) -> bool {
        self.0.truncated
    }

    /// `(preperiod, period)`, or `None` when truncated.
    #[getter]
    fn cycle(&self) -> Option<(usize, usize)> {
        self.0.cycle.as_ref().map(|c| (c.preperiod, c.period))
    }

    /// Members of the reached cycle, in orbit order.
    fn cycle_members(&self) -> Option<Vec<BigRational>> {
        self.0.cycle_states().map(<[BigRational]>::to_vec)
    }

    fn __len__(&self) -> usize {
        self.0.states.len()
    }

    fn __repr__(&self) -> String {
        match &self.0.cycle {
            Some(c) => format!(
                "Orbit(steps={}, preperiod={}, period={})",
                self.0.states.len() - 1,
                c.preperiod,
                c.period
            ),
            None => format!("Orbit(steps={}, truncated)", self.0.states.len() - 1),
        }
    }
}

#[pyfunction]
fn step(u: BigRational, params: &PyParams) -> PyResult<BigRational> {
    dynamics::step(&u, &params.0).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (u, params, max_steps = 100_000))]
fn orbit(u: BigRational, params: &PyParams, max_steps: usize) -> PyResult<PyOrbit> {
    dynamics::orbit(&u, &params.0, max_steps).map(PyOrbit).map_err(err)
}

/// First `n` digits of `φ(u)`.
#[pyfunction]
#[pyo3(signature = (u, params, n = 32))]
fn phi(u: BigRational, params: &PyParams, n: usize) -> PyResult<Vec<u32>> {
    isometry::phi(&u, &params.0, n).map(|a| a.digits).map_err(err)
}

/// `(preperiod, period, value)` of `φ(u)`, or `None` when the orbit does not
/// close within `max_steps`.
#[pyfunction]
#[pyo3(signature = (u, params, max_steps = 100_000))]
fn phi_exact(
    u: BigRational,
    params: &PyParams,
    max_steps: usize,
) -> PyResult<Option<(Vec<u32>, Vec<u32>, BigRational)>> {
    Ok(match isometry::phi_exact(&u, &params.0, max_steps).map_err(err)? {
        PhiExact::Periodic { digits } => Some((
            digits.preperiod().to_vec(),
            digits.period().to_vec(),
            rational_from_digits(&digits),
        )),
        PhiExact::Undetermined { .. } => None,
    })
}

#[pyfunction]
fn phi_inverse_exact(preperiod: Vec<u32>, period: Vec<u32>, params: &PyParams) -> PyResult<BigRational> {
    let h = HenselDigits::new(params.0.p(), preperiod, period).map_err(err)?;
    isometry::phi_inverse_exact(&h, &params.0).map_err(err)
}

#[pyfunction]
fn enumerate_periodic(k: usize, params: &PyParams) -> PyResult<Vec<BigRational>> {
    dynamics::enumerate_periodic(k, &params.0).map_err(err)
}

/// `(minus_one, plus_one)` lists of `(k, ℓ)` with `q^ℓ − p^k = ∓1`.
#[pyfunction]
#[pyo3(signature = (p, q, k_max = 64, ell_max = 64))]
fn catalan_search(p: u64, q: u64, k_max: u32, ell_max: u32) -> (Vec<(u32, u32)>, Vec<(u32, u32)>) {
    let s = dynamics::catalan_search(p, q, k_max, ell_max);
    (s.minus_one, s.plus_one)
}

#[pyfunction]
#[pyo3(signature = (params, u_min, u_max, max_steps = 1_000_000, escape_bits = 512))]
fn integer_cycle_search<'py>(
    py: Python<'py>,
    params: &PyParams,
    u_min: i64,
    u_max: i64,
    max_steps: usize,
    escape_bits: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let options = SearchOptions {
        max_steps,
        escape_bits,
        ..SearchOptions::default()
    };
    let rep = py
        .detach(|| dynamics::integer_cycle_search(&params.0, u_min, u_max, &options))
        .map_err(err)?;
    report(py, &rep)
}

/// The identity `N / (q^ℓ − p^k) = −u` for the cycle through `u`.
#[pyfunction]
#[pyo3(signature = (u, params, max_steps = 100_000))]
fn cycle_identity<'py>(
    py: Python<'py>,
    u: BigRational,
    params: &PyParams,
    max_steps: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let rec = dynamics::orbit(&u, &params.0, max_steps).map_err(err)?;
    let members = rec
        .cycle_states()
        .ok_or_else(|| BudgetExhaustedError::new_err(format!("no cycle within {max_steps} steps")))?
        .to_vec();
    let cycle = dynamics::Cycle::new(&params.0, members).map_err(err)?;
    report(py, &dynamics::cycle_identity(&cycle).map_err(err)?)
}

#[pyfunction]
fn height(u: BigRational, p: u64) -> PyResult<i64> {
    diagnostics::height(&u, p).map_err(err)
}

#[pyfunction]
fn height_naive(u: BigRational) -> BigInt {
    diagnostics::height_naive(&u)
}

#[pyfunction]
fn candidate_test(params: &PyParams) -> bool {
    diagnostics::candidate_test(&params.0)
}

#[pyfunction]
fn tranche_stats<'py>(py: Python<'py>, u: BigRational, params: &PyParams, m: usize) -> PyResult<Bound<'py, PyAny>> {
    report(py, &diagnostics::tranche_stats(&u, &params.0, m).map_err(err)?)
}

/// Mean height drift over `m` steps: full enumeration when `samples` is
/// `None` and `p^m` is small, otherwise `samples` random classes.
#[pyfunction]
#[pyo3(signature = (params, m, samples = None, rng_seed = 0))]
fn mean_drift<'py>(
    py: Python<'py>,
    params: &PyParams,
    m: u32,
    samples: Option<usize>,
    rng_seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = match samples {
        Some(count) => SampleSpec::Random { count, rng_seed },
        None => SampleSpec::Auto {
            count: 100_000,
            rng_seed,
        },
    };
    let rep = py.detach(|| diagnostics::mean_drift(&params.0, m, spec)).map_err(err)?;
    report(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (u, n, max_steps = 1_000_000))]
fn density_approximant<'py>(py: Python<'py>, u: i64, n: usize, max_steps: usize) -> PyResult<Bound<'py, PyAny>> {
    report(py, &isometry::density_approximant(u, n, max_steps).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (u, omega, params, n_max, max_steps = 1_000_000))]
fn psi_prime_omega<'py>(
    py: Python<'py>,
    u: BigRational,
    omega: BigRational,
    params: &PyParams,
    n_max: usize,
    max_steps: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let s = py
        .detach(|| isometry::psi_prime_omega(&u, &omega, &params.0, n_max, max_steps))
        .map_err(err)?;
    report(py, &s)
}

fn rational_function(p: u32, num: &[i64], den: &[i64]) -> PyResult<FpRationalFunction> {
    FpRationalFunction::from_coeffs(p, num, den).map_err(err)
}

/// First `n` coefficients of `φ(num/den)` over `F_p`; coefficient lists
/// start at the constant term.
#[pyfunction]
#[pyo3(signature = (p, num, den, n = 32))]
fn series_phi(p: u32, num: Vec<i64>, den: Vec<i64>, n: usize) -> PyResult<Vec<u32>> {
    Ok(fpseries::phi_series(&rational_function(p, &num, &den)?, n).coeffs)
}

/// `(numerator, denominator)` of `φ⁻¹` of an eventually periodic stream.
#[pyfunction]
fn series_phi_inverse(p: u32, preperiod: Vec<u32>, period: Vec<u32>) -> PyResult<(Vec<u32>, Vec<u32>)> {
    let h = HenselDigits::new(u64::from(p), preperiod, period).map_err(err)?;
    let f = fpseries::phi_series_inverse_exact(&h).map_err(err)?;
    Ok((f.numerator().coeffs().to_vec(), f.denominator().coeffs().to_vec()))
}

#[pyfunction]
fn series_height(p: u32, num: Vec<i64>, den: Vec<i64>) -> PyResult<usize> {
    Ok(fpseries::series_height(&rational_function(p, &num, &den)?))
}

#[pymodule(name = "padic_collatz")]
fn padic_collatz_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", padic_collatz::VERSION)?;
    m.add("PadicCollatzError", py.get_type::<PadicCollatzError>())?;
    m.add("BudgetExhaustedError", py.get_type::<BudgetExhaustedError>())?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyOrbit>()?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(orbit, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(phi_exact, m)?)?;
    m.add_function(wrap_pyfunction!(phi_inverse_exact, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_periodic, m)?)?;
    m.add_function(wrap_pyfunction!(catalan_search, m)?)?;
    m.add_function(wrap_pyfunction!(integer_cycle_search, m)?)?;
    m.add_function(wrap_pyfunction!(cycle_identity, m)?)?;
    m.add_function(wrap_pyfunction!(height, m)?)?;
    m.add_function(wrap_pyfunction!(height_naive, m)?)?;
    m.add_function(wrap_pyfunction!(candidate_test, m)?)?;
    m.add_function(wrap_pyfunction!(tranche_stats, m)?)?;
    m.add_function(wrap_pyfunction!(mean_drift, m)?)?;
    m.add_function(wrap_pyfunction!(density_approximant, m)?)?;
    m.add_function(wrap_pyfunction!(psi_prime_omega, m)?)?;
    m.add_function(wrap_pyfunction!(series_phi, m)?)?;
    m.add_function(wrap_pyfunction!(series_phi_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(series_height, m)?)?;
    Ok(())
}
