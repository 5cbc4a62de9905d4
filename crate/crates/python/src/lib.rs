//! Python bindings for the deblurring loop.
//!
//! Images cross the boundary as nested lists of rows (`list[list[float]]`),
//! so the module has no numpy dependency; `numpy.asarray(img.to_rows())` and
//! `Image(arr.tolist())` convert both ways.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use probe_core::estimate::MapUchParams;
use probe_core::evaluation;
use probe_core::filters;
use probe_core::io::{self, BitDepth};
use probe_core::probe::{EstimatorChoice, ProbeSummary};
use probe_core::spectral::{self, kernel_spectrum, periodogram};
use probe_core::{synthetic, theory};
use probe_core::{BlurKernel, BoundaryMode, ProbeConfig, ProbeError, Psd, RegularizationConstant, StopPolicy};

fn py_err(e: ProbeError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn boundary(name: &str) -> PyResult<BoundaryMode> {
    match name {
        "reflective" => Ok(BoundaryMode::Reflective),
        "periodic" => Ok(BoundaryMode::Periodic),
        other => Err(PyValueError::new_err(format!("unknown boundary {other:?}"))),
    }
}

fn reg(c: f64) -> PyResult<RegularizationConstant> {
    RegularizationConstant::new(c).map_err(py_err)
}

/// Grayscale image with values nominally in [0, 1].
#[pyclass(name = "Image", module = "probe_py")]
#[derive(Clone)]
struct PyImage {
    inner: probe_core::Image,
}

#[pymethods]
impl PyImage {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(PyValueError::new_err("rows must all have the same length"));
        }
        let data = rows.into_iter().flatten().collect();
        let inner = probe_core::Image::new(width, height, data).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Read a PNG or PGM file as luminance.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: io::read_gray(path).map_err(py_err)? })
    }

    #[pyo3(signature = (path, bits = 8))]
    fn save(&self, path: &str, bits: u32) -> PyResult<()> {
        let depth = match bits {
            8 => BitDepth::Eight,
            16 => BitDepth::Sixteen,
            _ => return Err(PyValueError::new_err("bits must be 8 or 16")),
        };
        io::write_gray(path, &self.inner, depth).map_err(py_err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        self.inner.data().chunks(self.inner.width()).map(<[f64]>::to_vec).collect()
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{})", self.inner.width(), self.inner.height())
    }
}

/// Square, odd-sized, nonnegative blur kernel summing to one.
#[pyclass(name = "Kernel", module = "probe_py")]
#[derive(Clone)]
struct PyKernel {
    inner: BlurKernel,
}

#[pymethods]
impl PyKernel {
    /// Normalize raw weights (row-major, `support * support` of them).
    #[new]
    fn new(support: usize, weights: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: BlurKernel::normalized(support, weights).map_err(py_err)? })
    }

    #[staticmethod]
    fn gaussian(sigma: f64, support: usize) -> PyResult<Self> {
        Ok(Self { inner: BlurKernel::gaussian(sigma, support).map_err(py_err)? })
    }

    #[staticmethod]
    fn disk(radius: f64) -> PyResult<Self> {
        Ok(Self { inner: BlurKernel::disk(radius).map_err(py_err)? })
    }

    #[staticmethod]
    fn delta(support: usize) -> PyResult<Self> {
        Ok(Self { inner: BlurKernel::delta(support).map_err(py_err)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: BlurKernel::load(path).map_err(py_err)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(py_err)
    }

    #[getter]
    fn support(&self) -> usize {
        self.inner.support()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn center_weight(&self) -> f64 {
        self.inner.center_weight()
    }

    fn correlation(&self, other: &PyKernel) -> f64 {
        self.inner.correlation(&other.inner)
    }

    fn __repr__(&self) -> String {
        format!("Kernel(support={})", self.inner.support())
    }
}

/// Outcome of `run_probe`.
#[pyclass(name = "ProbeRun", module = "probe_py")]
struct PyProbeRun {
    #[pyo3(get)]
    final_image: PyImage,
    #[pyo3(get)]
    kernels: Vec<PyKernel>,
    #[pyo3(get)]
    psnr: Vec<Option<f64>>,
    #[pyo3(get)]
    stop_reason: String,
    summary: ProbeSummary,
}

#[pymethods]
impl PyProbeRun {
    /// Per-iteration report as a JSON string.
    fn summary_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.summary).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

#[pyfunction]
#[pyo3(signature = (image, kernel, boundary = "reflective"))]
fn convolve(image: &PyImage, kernel: &PyKernel, boundary: &str) -> PyResult<PyImage> {
    let b = self::boundary(boundary)?;
    Ok(PyImage { inner: spectral::convolve(&image.inner, &kernel.inner, b) })
}

#[pyfunction]
#[pyo3(signature = (image, sigma, seed = 0))]
fn add_noise(image: &PyImage, sigma: f64, seed: u64) -> PyResult<PyImage> {
    Ok(PyImage { inner: spectral::add_gaussian_noise(&image.inner, sigma, seed).map_err(py_err)? })
}

/// Non-blind deblurring with the modified inverse filter.
#[pyfunction]
#[pyo3(signature = (image, kernel, c = 0.01, boundary = "reflective"))]
fn deblur(image: &PyImage, kernel: &PyKernel, c: f64, boundary: &str) -> PyResult<PyImage> {
    let b = self::boundary(boundary)?;
    Ok(PyImage { inner: filters::deblur(&image.inner, &kernel.inner, reg(c)?, b) })
}

#[pyfunction]
fn psnr(reference: &PyImage, estimate: &PyImage) -> PyResult<f64> {
    evaluation::psnr(&reference.inner, &estimate.inner).map_err(py_err)
}

#[pyfunction]
fn test_card(width: usize, height: usize) -> PyImage {
    PyImage { inner: synthetic::test_card(width, height) }
}

#[pyfunction]
#[pyo3(signature = (width, height, seed = 0))]
fn natural_scene(width: usize, height: usize, seed: u64) -> PyImage {
    PyImage { inner: synthetic::natural_scene(width, height, seed) }
}

/// Run the blind feedback loop. `true_kernel` selects the oracle estimator.
#[pyfunction]
#[pyo3(signature = (
    image, *, c = 0.01, iters = 3, support = 15, boundary = "reflective",
    true_kernel = None, truth = None, tau = None, noise_sigma = 0.0, clamp = true, seed = 0,
))]
#[allow(clippy::too_many_arguments)]
fn run_probe(
    image: &PyImage,
    c: f64,
    iters: usize,
    support: usize,
    boundary: &str,
    true_kernel: Option<&PyKernel>,
    truth: Option<&PyImage>,
    tau: Option<f64>,
    noise_sigma: f64,
    clamp: bool,
    seed: u64,
) -> PyResult<PyProbeRun> {
    let estimator = match true_kernel {
        Some(k) => EstimatorChoice::Oracle { true_kernel: k.inner.clone() },
        None => EstimatorChoice::MapUch { params: MapUchParams::default() },
    };
    let name = estimator.name();
    let config = ProbeConfig {
        c: reg(c)?,
        max_iters: iters,
        stop_policy: tau.map_or(StopPolicy::Fixed, |tau| StopPolicy::BoostThreshold { tau }),
        boundary: self::boundary(boundary)?,
        initial_support: support,
        estimator,
        seed,
        clamp_feedback: clamp,
        noise_sigma,
    };
    let result = probe_core::run_probe(&image.inner, &config, truth.map(|t| &t.inner)).map_err(py_err)?;
    let summary = result.summary(name);
    Ok(PyProbeRun {
        final_image: PyImage { inner: result.final_image.clone() },
        kernels: result.reports.iter().map(|r| PyKernel { inner: r.residual_kernel.clone() }).collect(),
        psnr: result.psnr_trace(),
        stop_reason: result.stop_reason.to_string(),
        summary,
    })
}

#[pyfunction]
fn oracle_step(h: f64, c: f64) -> f64 {
    theory::oracle_step(h, c)
}

/// Nonnegative fixed points of the oracle recursion, ascending.
#[pyfunction]
fn fixed_points(c: f64) -> PyResult<Vec<f64>> {
    Ok(theory::fixed_points(c).map_err(py_err)?.all())
}

#[pyfunction]
fn trace(h0: f64, c: f64, iterations: usize) -> PyResult<Vec<f64>> {
    Ok(theory::trace(h0, c, iterations).map_err(py_err)?.values)
}

#[pyfunction]
fn check_conditions<'py>(py: Python<'py>, h0: f64, c: f64) -> PyResult<Bound<'py, PyDict>> {
    let flags = theory::check_conditions(h0, c).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("beta_condition", flags.beta_condition)?;
    d.set_item("alpha_condition", flags.alpha_condition)?;
    Ok(d)
}

/// Predicted MSE, PSNR and boost per iteration for a sharp image blurred by
/// `kernel` with white noise of level `sigma_n`.
#[pyfunction]
#[pyo3(signature = (image, kernel, sigma_n = 0.0, c = 0.01, iters = 3))]
fn predict<'py>(
    py: Python<'py>,
    image: &PyImage,
    kernel: &PyKernel,
    sigma_n: f64,
    c: f64,
    iters: usize,
) -> PyResult<Bound<'py, PyDict>> {
    reg(c)?;
    let (w, h) = (image.inner.width(), image.inner.height());
    let h0 = kernel_spectrum(&kernel.inner, w, h).map_err(py_err)?;
    let s_n = Psd::flat(w, h, sigma_n * sigma_n).map_err(py_err)?;
    let pred = theory::predict_mse(&periodogram(&image.inner), &s_n, &h0, c, iters).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("mse", pred.mse)?;
    d.set_item("psnr", pred.psnr)?;
    d.set_item("boost", pred.boost)?;
    d.set_item("noise_level", pred.noise_level)?;
    Ok(d)
}

#[pymodule]
fn probe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImage>()?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyProbeRun>()?;
    m.add_function(wrap_pyfunction!(convolve, m)?)?;
    m.add_function(wrap_pyfunction!(add_noise, m)?)?;
    m.add_function(wrap_pyfunction!(deblur, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(test_card, m)?)?;
    m.add_function(wrap_pyfunction!(natural_scene, m)?)?;
    m.add_function(wrap_pyfunction!(run_probe, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_step, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_points, m)?)?;
    m.add_function(wrap_pyfunction!(trace, m)?)?;
    m.add_function(wrap_pyfunction!(check_conditions, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    Ok(())
}
