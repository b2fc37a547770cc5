//! Python bindings: the kernel context, sup-norm brackets, admissibility
//! enumeration, and the end-to-end solve, mirroring the Rust API on plain
//! Python types.

use banachfit::kernel::{DecayWeight, KernelContext};
use banachfit::network::{self, Activation, Architecture};
use banachfit::pipeline::{self, PipelineOptions};
use banachfit::regularizer::RegConfig;
use banachfit::report::{self, SolutionReport};
use banachfit::signs::{self, AdmissibilityVerdict, SignOptions, SignVector};
use banachfit::solver::Dataset;
use banachfit::supnorm::{self, Combination, SearchConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_activation(name: &str) -> PyResult<Activation> {
    match name {
        "relu" => Ok(Activation::Relu),
        "identity" => Ok(Activation::Identity),
        other => Err(PyValueError::new_err(format!(
            "unknown activation `{other}` (expected relu or identity)"
        ))),
    }
}

/// A fixed architecture with its decay weight: the kernel k(x, theta).
#[pyclass(name = "KernelContext", module = "banachfit_py")]
struct PyKernelContext {
    inner: KernelContext,
}

#[pymethods]
impl PyKernelContext {
    /// KernelContext(layers, activation="relu", decay_exponent=None,
    /// output_activation_applied=False)
    #[new]
    #[pyo3(signature = (layers, activation="relu", decay_exponent=None, output_activation_applied=false))]
    fn new(
        layers: Vec<usize>,
        activation: &str,
        decay_exponent: Option<f64>,
        output_activation_applied: bool,
    ) -> PyResult<Self> {
        let arch = Architecture::new(layers, parse_activation(activation)?)
            .map_err(value_err)?
            .with_output_activation(output_activation_applied);
        let decay = match decay_exponent {
            Some(p) => DecayWeight::new(p).map_err(value_err)?,
            None => DecayWeight::for_depth(arch.depth()),
        };
        Ok(Self {
            inner: KernelContext::new(arch, decay),
        })
    }

    #[getter]
    fn layers(&self) -> Vec<usize> {
        self.inner.arch().widths().to_vec()
    }

    #[getter]
    fn decay_exponent(&self) -> f64 {
        self.inner.decay().exponent()
    }

    /// Length of the packed parameter vector.
    fn param_len(&self) -> usize {
        self.inner.arch().param_len()
    }

    /// The parameter norm: max over neuron rows of the l1 norm of
    /// (weights, bias).
    fn param_norm(&self, theta: Vec<f64>) -> PyResult<f64> {
        let theta = network::unpack(self.inner.arch(), &theta).map_err(value_err)?;
        Ok(network::param_norm(&theta))
    }

    /// Network output at x for the packed parameters.
    fn forward(&self, theta: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let theta = network::unpack(self.inner.arch(), &theta).map_err(value_err)?;
        network::forward(self.inner.arch(), &theta, &x).map_err(value_err)
    }

    /// Kernel vector k(x, theta) = forward(theta, x) * xi(theta).
    fn kernel(&self, x: Vec<f64>, theta: Vec<f64>) -> PyResult<Vec<f64>> {
        let theta = network::unpack(self.inner.arch(), &theta).map_err(value_err)?;
        self.inner.eval(&x, &theta).map_err(value_err)
    }

    /// The decay weight xi(theta) in (0, 1].
    fn xi(&self, theta: Vec<f64>) -> PyResult<f64> {
        let theta = network::unpack(self.inner.arch(), &theta).map_err(value_err)?;
        Ok(self.inner.xi(&theta))
    }

    /// Certified bound C(x) = max(1, max|x_i|) on |k(x, .)|.
    fn input_bound(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.input_bound(&x).map_err(value_err)
    }

    /// Bracket the sup norm of one kernel section; returns a dict with
    /// lower, upper, certified and the packed witness.
    #[pyo3(signature = (x, component=0, seed=0, starts=64, iters=200))]
    fn evaluation_sup_norm<'py>(
        &self,
        py: Python<'py>,
        x: Vec<f64>,
        component: usize,
        seed: u64,
        starts: usize,
        iters: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg = SearchConfig {
            seed,
            starts,
            iters,
            ..SearchConfig::default()
        };
        let est = self.inner.evaluation_sup_norm(&x, component, &cfg);
        let out = PyDict::new(py);
        out.set_item("lower", est.lower)?;
        out.set_item("upper", est.upper)?;
        out.set_item("certified", est.is_certified())?;
        out.set_item("witness", network::pack(&est.witness))?;
        Ok(out)
    }
}

/// Bracket |sum_i coef_i k(x_i, .)| over the parameters.
#[pyfunction]
#[pyo3(signature = (ctx, terms, component=0, seed=0, starts=256, iters=400))]
fn estimate_sup<'py>(
    py: Python<'py>,
    ctx: &PyKernelContext,
    terms: Vec<(f64, Vec<f64>)>,
    component: usize,
    seed: u64,
    starts: usize,
    iters: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = SearchConfig {
        seed,
        starts,
        iters,
        ..SearchConfig::default()
    };
    let comb = Combination::new(terms, component);
    let est = supnorm::estimate_sup(&ctx.inner, &comb, &cfg);
    let out = PyDict::new(py);
    out.set_item("lower", est.lower)?;
    out.set_item("upper", est.upper)?;
    out.set_item("certified", est.is_certified())?;
    out.set_item("witness", network::pack(&est.witness))?;
    Ok(out)
}

/// Enumerate all sign vectors over the inputs with verdicts.
#[pyfunction]
#[pyo3(signature = (ctx, inputs, component=0, seed=0, starts=256, iters=400, scaled_witnesses=true))]
#[allow(clippy::too_many_arguments)]
fn enumerate_admissible<'py>(
    py: Python<'py>,
    ctx: &PyKernelContext,
    inputs: Vec<Vec<f64>>,
    component: usize,
    seed: u64,
    starts: usize,
    iters: usize,
    scaled_witnesses: bool,
) -> PyResult<Bound<'py, PyList>> {
    let cfg = SearchConfig {
        seed,
        starts,
        iters,
        ..SearchConfig::default()
    };
    let opts = SignOptions {
        scaled_witnesses,
        ..SignOptions::default()
    };
    let table = signs::enumerate_admissible(&ctx.inner, &inputs, component, &opts, &cfg)
        .map_err(value_err)?;
    let rows = PyList::empty(py);
    for (sign, verdict) in table {
        let row = PyDict::new(py);
        row.set_item("sign", sign.entries().to_vec())?;
        row.set_item("verdict", verdict.kind())?;
        match verdict {
            AdmissibilityVerdict::CertifiedAdmissible(cert) => {
                row.set_item("certificate", cert.name())?;
            }
            AdmissibilityVerdict::CertifiedInadmissible { witness, value } => {
                row.set_item("witness", network::pack(&witness))?;
                row.set_item("value", value)?;
            }
            AdmissibilityVerdict::Uncertified(est) => {
                row.set_item("bracket", (est.lower, est.upper))?;
            }
        }
        rows.append(row)?;
    }
    Ok(rows)
}

/// Check one sign vector for admissibility.
#[pyfunction]
#[pyo3(signature = (ctx, inputs, sign, component=0, seed=0, starts=256, iters=400, scaled_witnesses=true))]
#[allow(clippy::too_many_arguments)]
fn is_admissible(
    ctx: &PyKernelContext,
    inputs: Vec<Vec<f64>>,
    sign: Vec<i8>,
    component: usize,
    seed: u64,
    starts: usize,
    iters: usize,
    scaled_witnesses: bool,
) -> PyResult<String> {
    let cfg = SearchConfig {
        seed,
        starts,
        iters,
        ..SearchConfig::default()
    };
    let opts = SignOptions {
        scaled_witnesses,
        ..SignOptions::default()
    };
    let sign = SignVector::new(sign).map_err(value_err)?;
    let verdict = signs::is_admissible(&ctx.inner, &inputs, component, &sign, &opts, &cfg);
    Ok(verdict.kind().to_string())
}

/// Solve a dataset end to end; returns the full report as a dict (parsed
/// from the canonical JSON report).
#[pyfunction]
#[pyo3(signature = (ctx, xs, ys, seed=0, starts=256, iters=400, lambda0=0.1, include_uncertified_signs=false, scaled_witnesses=true))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    ctx: &PyKernelContext,
    xs: Vec<Vec<f64>>,
    ys: Vec<Vec<f64>>,
    seed: u64,
    starts: usize,
    iters: usize,
    lambda0: f64,
    include_uncertified_signs: bool,
    scaled_witnesses: bool,
) -> PyResult<Bound<'py, PyAny>> {
    if xs.len() != ys.len() {
        return Err(PyValueError::new_err(format!(
            "{} inputs but {} outputs",
            xs.len(),
            ys.len()
        )));
    }
    let dataset =
        Dataset::new(xs.into_iter().zip(ys).collect()).map_err(value_err)?;
    let opts = PipelineOptions {
        search: SearchConfig {
            seed,
            starts,
            iters,
            ..SearchConfig::default()
        },
        signs: SignOptions {
            scaled_witnesses,
            ..SignOptions::default()
        },
        reg: RegConfig::new(lambda0).map_err(value_err)?,
        include_uncertified_signs,
    };
    let run = pipeline::run(&ctx.inner, &dataset, &opts).map_err(value_err)?;
    let solution = SolutionReport::build(report::config_echo(&ctx.inner, &opts), &run, 0);
    let json = solution.to_json();
    let loads = py.import("json")?.getattr("loads")?;
    loads.call1((json,))
}

/// Evaluate a kernel expansion sum_i beta_i k(., theta_i) at x.
#[pyfunction]
#[pyo3(signature = (ctx, terms, x, component=0))]
fn evaluate_expansion(
    ctx: &PyKernelContext,
    terms: Vec<(f64, Vec<f64>)>,
    x: Vec<f64>,
    component: usize,
) -> PyResult<f64> {
    let mut acc = 0.0;
    for (beta, packed) in terms {
        let theta = network::unpack(ctx.inner.arch(), &packed).map_err(value_err)?;
        acc += beta
            * ctx
                .inner
                .eval_component(&x, &theta, component)
                .map_err(value_err)?;
    }
    Ok(acc)
}

#[pymodule]
fn banachfit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernelContext>()?;
    m.add_function(wrap_pyfunction!(estimate_sup, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(is_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_expansion, m)?)?;
    Ok(())
}
