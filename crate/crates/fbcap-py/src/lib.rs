//! Python bindings: a `Channel` class wrapping an ARMA noise model plus a
//! power budget, with methods for the capacity bound, loop simulation, and
//! stability report, and module-level helpers for validation and the
//! first-order formula.
//!
//! Build as a Python module by renaming the produced cdylib to
//! `fbcap_py.so` (see python/smoke_test.py), or with maturin using the
//! `extension-module` feature.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use fbcap::{ArmaSpec, CapacityQuery, Error, SimConfig};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::SolverFailure(_) | Error::IllConditionedIntegral(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Check ARMA parameters; returns the list of violations (empty when valid).
#[pyfunction]
fn validate(f: Vec<f64>, g: Vec<f64>, noise_variance: f64) -> Vec<String> {
    fbcap::validate(&f, &g, noise_variance)
}

/// Exact first-order capacity in bits (p, q <= 1).
#[pyfunction]
#[pyo3(signature = (f, g, noise_variance, power))]
fn kim_first_order(f: Vec<f64>, g: Vec<f64>, noise_variance: f64, power: f64) -> PyResult<f64> {
    let spec = ArmaSpec::new(f, g, noise_variance).map_err(to_py_err)?;
    let query = CapacityQuery::new(spec, power).map_err(to_py_err)?;
    fbcap::kim_first_order(&query).map_err(to_py_err)
}

/// Solved capacity bound with diagnostics.
#[pyclass]
struct CapacityResult {
    #[pyo3(get)]
    a_bar: f64,
    #[pyo3(get)]
    capacity_bits: f64,
    #[pyo3(get)]
    variant: String,
    #[pyo3(get)]
    loop_verdict: String,
    #[pyo3(get)]
    all_real_roots: Vec<f64>,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    achieved_power: f64,
}

#[pymethods]
impl CapacityResult {
    fn __repr__(&self) -> String {
        format!(
            "CapacityResult(a_bar={}, capacity_bits={}, variant='{}', loop_verdict='{}')",
            self.a_bar, self.capacity_bits, self.variant, self.loop_verdict
        )
    }
}

/// Closed-loop simulation report; moment fields are None after divergence.
#[pyclass]
struct SimResult {
    #[pyo3(get)]
    mode: String,
    #[pyo3(get)]
    input_power: Option<f64>,
    #[pyo3(get)]
    innovation_variance: Option<f64>,
    #[pyo3(get)]
    whiteness_max_corr: Option<f64>,
    #[pyo3(get)]
    diverged: bool,
    #[pyo3(get)]
    diverged_at: Option<usize>,
    #[pyo3(get)]
    predicted_input_power: Option<f64>,
    #[pyo3(get)]
    samples_used: usize,
}

#[pymethods]
impl SimResult {
    fn __repr__(&self) -> String {
        format!(
            "SimResult(mode='{}', input_power={:?}, diverged={})",
            self.mode, self.input_power, self.diverged
        )
    }
}

/// An ARMA colored Gaussian noise channel with a power constraint.
///
/// Usage:
///
/// ```text
/// ch = Channel(f=[], g=[-0.5], noise_variance=1.0, power=5/9)
/// bound = ch.lower_bound()
/// report = ch.simulate("whitened", samples=100_000, seed=7)
/// ```
#[pyclass]
struct Channel {
    spec: ArmaSpec,
    query: CapacityQuery,
}

#[pymethods]
impl Channel {
    #[new]
    #[pyo3(signature = (f, g, noise_variance, power, c = 1.0))]
    fn new(f: Vec<f64>, g: Vec<f64>, noise_variance: f64, power: f64, c: f64) -> PyResult<Self> {
        let spec = ArmaSpec::new(f, g, noise_variance).map_err(to_py_err)?;
        let query = CapacityQuery::with_c(spec.clone(), power, c).map_err(to_py_err)?;
        Ok(Self { spec, query })
    }

    /// Solve the capacity lower bound.
    fn lower_bound(&self) -> PyResult<CapacityResult> {
        let bound = fbcap::lower_bound(&self.query).map_err(to_py_err)?;
        let achieved = fbcap::achieved_power(&bound.signed_plant(self.query.c), &self.spec);
        Ok(CapacityResult {
            a_bar: bound.a_bar,
            capacity_bits: bound.capacity_bits,
            variant: bound.variant.to_string(),
            loop_verdict: bound.loop_verdict.to_string(),
            all_real_roots: bound.all_real_roots,
            residual: bound.residual,
            achieved_power: achieved,
        })
    }

    /// Exact first-order capacity in bits; raises for p or q above 1.
    fn kim_bits(&self) -> PyResult<f64> {
        fbcap::kim_first_order(&self.query).map_err(to_py_err)
    }

    /// Simulate the loop at the solved bound.
    ///
    /// Args:
    ///     mode: "whitened" or "colored".
    ///     samples: length of the evaluated window.
    ///     burn_in: samples discarded up front (default: spec-derived).
    ///     seed: RNG seed.
    ///     divergence_threshold: state magnitude that counts as blow-up.
    #[pyo3(signature = (mode, samples = 100_000, burn_in = None, seed = 0, divergence_threshold = 1e12))]
    fn simulate(
        &self,
        mode: &str,
        samples: usize,
        burn_in: Option<usize>,
        seed: u64,
        divergence_threshold: f64,
    ) -> PyResult<SimResult> {
        let bound = fbcap::lower_bound(&self.query).map_err(to_py_err)?;
        let plant = bound.coding_plant(self.query.c);
        let cfg = SimConfig::new(
            samples,
            burn_in.unwrap_or_else(|| self.spec.default_burn_in()),
            seed,
        )
        .map_err(to_py_err)?
        .with_divergence_threshold(divergence_threshold);
        let report = match mode {
            "whitened" => fbcap::simulate_whitened(&plant, &self.spec, &cfg),
            "colored" => fbcap::simulate_colored(&plant, &self.spec, &cfg),
            other => {
                return Err(PyValueError::new_err(format!(
                    "mode must be 'whitened' or 'colored', got '{other}'"
                )))
            }
        }
        .map_err(to_py_err)?;
        Ok(SimResult {
            mode: report.mode.to_string(),
            input_power: report.input_power,
            innovation_variance: report.innovation_variance,
            whiteness_max_corr: report.whiteness_max_corr,
            diverged: report.diverged,
            diverged_at: report.diverged_at,
            predicted_input_power: report.predicted_input_power,
            samples_used: report.samples_used,
        })
    }

    /// Stability of the coding loop at the solved bound: a dict with the
    /// verdict, characteristic poles as (re, im) pairs, the whitened-loop
    /// pole, and the consistency flag.
    fn stability<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        use pyo3::types::PyDict;
        let bound = fbcap::lower_bound(&self.query).map_err(to_py_err)?;
        let plant = bound.coding_plant(self.query.c);
        let report = fbcap::stability_report(&plant, &self.spec).map_err(to_py_err)?;
        let dict = PyDict::new(py);
        dict.set_item("verdict", report.verdict.to_string())?;
        let poles: Vec<(f64, f64)> = report.chi_poles.iter().map(|p| (p.re, p.im)).collect();
        dict.set_item("chi_poles", poles)?;
        dict.set_item("whitened_pole", report.whitened_pole)?;
        dict.set_item("equivalence_consistent", report.equivalence_consistent)?;
        Ok(dict)
    }

    /// Rate integral at the solved bound: (bits, expected_bits, discrepancy).
    fn rate_integral(&self) -> PyResult<(f64, f64, bool)> {
        let bound = fbcap::lower_bound(&self.query).map_err(to_py_err)?;
        let plant = bound.coding_plant(self.query.c);
        let ri = fbcap::rate_integral(&plant, &self.spec).map_err(to_py_err)?;
        Ok((ri.bits, ri.expected_bits, ri.discrepancy))
    }

    fn __repr__(&self) -> String {
        format!(
            "Channel(f={:?}, g={:?}, noise_variance={}, power={}, c={})",
            self.spec.f(),
            self.spec.g(),
            self.spec.sigma_hat_sq(),
            self.query.power,
            self.query.c
        )
    }
}

#[pymodule]
fn fbcap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Channel>()?;
    m.add_class::<CapacityResult>()?;
    m.add_class::<SimResult>()?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(kim_first_order, m)?)?;
    Ok(())
}
