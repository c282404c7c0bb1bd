//! Python bindings: images, oracle hiding schemes, attacks, metrics and
//! bound arithmetic.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use peel_core::image;
use peel_core::inpaint::{self, DiffusionInpainter, ExternalInpainter, Inpainter, InpainterKind, ZeroFill};
use peel_core::metrics;
use peel_core::removal::{self, AttackConfig, AttackMode};
use peel_core::{synth, theory, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Row-major interleaved raster with values in [0, 1].
#[pyclass(name = "Image", module = "peel", from_py_object)]
#[derive(Clone)]
pub struct PyImage {
    inner: image::ImageBuf,
}

impl From<image::ImageBuf> for PyImage {
    fn from(inner: image::ImageBuf) -> Self {
        PyImage { inner }
    }
}

#[pymethods]
impl PyImage {
    #[new]
    fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> PyResult<Self> {
        image::ImageBuf::new(width, height, channels, data).map(Into::into).map_err(py_err)
    }

    #[staticmethod]
    fn from_bytes(width: usize, height: usize, channels: usize, data: Vec<u8>) -> PyResult<Self> {
        image::ImageBuf::from_bytes(width, height, channels, &data).map(Into::into).map_err(py_err)
    }

    #[staticmethod]
    fn filled(width: usize, height: usize, channels: usize, value: f64) -> PyResult<Self> {
        image::ImageBuf::filled(width, height, channels, value).map(Into::into).map_err(py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        image::load_image(path).map(Into::into).map_err(py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        image::save_image(&self.inner, path).map_err(py_err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.inner.channels()
    }

    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.inner.to_bytes()
    }

    fn get(&self, x: usize, y: usize, c: usize) -> PyResult<f64> {
        if x >= self.inner.width() || y >= self.inner.height() || c >= self.inner.channels() {
            return Err(PyValueError::new_err(format!("({x}, {y}, {c}) out of bounds")));
        }
        Ok(self.inner.get(x, y, c))
    }

    fn __eq__(&self, other: &PyImage) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{}x{})", self.inner.width(), self.inner.height(), self.inner.channels())
    }
}

/// LSB (`Scheme.lsb(bits)`) or neighborhood-spread (`Scheme.spread(r, bits)`).
#[pyclass(name = "Scheme", module = "peel", from_py_object)]
#[derive(Clone)]
pub struct PyScheme {
    inner: peel_core::HidingScheme,
}

#[pymethods]
impl PyScheme {
    #[staticmethod]
    #[pyo3(signature = (bits = 4))]
    fn lsb(bits: u8) -> PyResult<Self> {
        peel_core::HidingScheme::lsb(bits).map(|inner| PyScheme { inner }).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (radius = 1, bits = 4))]
    fn spread(radius: usize, bits: u8) -> PyResult<Self> {
        peel_core::HidingScheme::spread(radius, bits).map(|inner| PyScheme { inner }).map_err(py_err)
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn bits(&self) -> u8 {
        self.inner.bits()
    }

    #[getter]
    fn locality_radius(&self) -> usize {
        self.inner.locality_radius()
    }

    fn hide(&self, cover: &PyImage, secret: &PyImage) -> PyResult<PyImage> {
        self.inner.hide(&cover.inner, &secret.inner).map(Into::into).map_err(py_err)
    }

    fn reveal(&self, container: &PyImage) -> PyResult<PyImage> {
        self.inner.reveal(&container.inner).map(Into::into).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Scheme.{}(bits={}, r={})", self.inner.name(), self.inner.bits(), self.inner.locality_radius())
    }
}

fn build_inpainter(kind: &str, external_cmd: Option<String>) -> PyResult<(InpainterKind, Box<dyn Inpainter>)> {
    let kind: InpainterKind = kind.parse().map_err(py_err)?;
    let boxed: Box<dyn Inpainter> = match kind {
        InpainterKind::Zero => Box::new(ZeroFill),
        InpainterKind::Diffusion => Box::new(DiffusionInpainter::default()),
        InpainterKind::External => Box::new(ExternalInpainter::new(
            external_cmd.ok_or_else(|| PyValueError::new_err("external inpainter needs external_cmd"))?,
        )),
    };
    Ok((kind, boxed))
}

/// Remove-and-inpaint attack; `mode` is "peel" or "peelo". Unset parameters
/// take the mode's defaults.
#[pyfunction]
#[pyo3(signature = (container, mode = "peel", k = None, l = None, d = None, delta = None, seed = 0,
                    inpainter = "diffusion", use_edge = None, use_dr = None, external_cmd = None))]
#[allow(clippy::too_many_arguments)]
fn run_attack(
    py: Python<'_>,
    container: &PyImage,
    mode: &str,
    k: Option<usize>,
    l: Option<usize>,
    d: Option<usize>,
    delta: Option<f64>,
    seed: u64,
    inpainter: &str,
    use_edge: Option<bool>,
    use_dr: Option<bool>,
    external_cmd: Option<String>,
) -> PyResult<PyImage> {
    let (mode, base) = match mode {
        "peel" => (AttackMode::Peel, AttackConfig::peel()),
        "peelo" => (AttackMode::PeelO, AttackConfig::peelo()),
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let (kind, inp) = build_inpainter(inpainter, external_cmd)?;
    let cfg = AttackConfig {
        k: k.unwrap_or(base.k),
        l: l.unwrap_or(base.l),
        d: d.unwrap_or(base.d),
        delta: delta.unwrap_or(base.delta),
        seed,
        inpainter: kind,
        use_edge: use_edge.unwrap_or(base.use_edge),
        use_dr: use_dr.unwrap_or(base.use_dr),
        ..base
    };
    let img = container.inner.clone();
    py.detach(|| removal::run_attack(&img, &cfg, mode, inp.as_ref()))
        .map(Into::into)
        .map_err(py_err)
}

#[pyfunction]
fn gn_attack(container: &PyImage, delta: f64, seed: u64) -> PyImage {
    removal::gn_attack(&container.inner, delta, seed).into()
}

#[pyfunction]
fn gb_attack(container: &PyImage) -> PyImage {
    removal::gb_attack(&container.inner).into()
}

#[pyfunction]
fn mb_attack(container: &PyImage) -> PyImage {
    removal::mb_attack(&container.inner).into()
}

#[pyfunction]
fn rmse(a: &PyImage, b: &PyImage) -> PyResult<f64> {
    metrics::rmse(&a.inner, &b.inner).map_err(py_err)
}

#[pyfunction]
fn psnr(a: &PyImage, b: &PyImage) -> PyResult<f64> {
    metrics::psnr(&a.inner, &b.inner).map_err(py_err)
}

#[pyfunction]
fn vif(reference: &PyImage, dist: &PyImage) -> PyResult<f64> {
    metrics::vif(&reference.inner, &dist.inner).map_err(py_err)
}

/// Mean RMSE of the inpainter over `trials` random `l`x`l` holes.
#[pyfunction]
#[pyo3(signature = (images, l, trials = 50, inpainter = "diffusion", seed = 0, external_cmd = None))]
fn estimate_gamma(
    py: Python<'_>,
    images: Vec<PyImage>,
    l: usize,
    trials: usize,
    inpainter: &str,
    seed: u64,
    external_cmd: Option<String>,
) -> PyResult<f64> {
    let (_, inp) = build_inpainter(inpainter, external_cmd)?;
    let imgs: Vec<image::ImageBuf> = images.into_iter().map(|i| i.inner).collect();
    py.detach(|| inpaint::estimate_gamma(inp.as_ref(), &imgs, l, trials, metrics::Distance::Rmse, seed))
        .map_err(py_err)
}

#[pyfunction]
fn epsilon_bound(gamma: f64, big_k: usize, k: usize) -> PyResult<f64> {
    theory::epsilon_bound(gamma, big_k, k).map_err(py_err)
}

#[pyfunction]
fn check_theorem(gamma: f64, epsilon: f64, big_k: usize, k: usize) -> PyResult<bool> {
    theory::check_theorem(gamma, epsilon, big_k, k).map_err(py_err)
}

/// Deterministic procedural textured image.
#[pyfunction]
#[pyo3(signature = (width, height, channels = 3, seed = 0))]
fn natural_image(width: usize, height: usize, channels: usize, seed: u64) -> PyResult<PyImage> {
    if width == 0 || height == 0 || !(channels == 1 || channels == 3) {
        return Err(PyValueError::new_err("need width, height >= 1 and channels in {1, 3}"));
    }
    Ok(synth::natural_image(width, height, channels, seed).into())
}

#[pymodule]
fn peel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImage>()?;
    m.add_class::<PyScheme>()?;
    m.add_function(wrap_pyfunction!(run_attack, m)?)?;
    m.add_function(wrap_pyfunction!(gn_attack, m)?)?;
    m.add_function(wrap_pyfunction!(gb_attack, m)?)?;
    m.add_function(wrap_pyfunction!(mb_attack, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(vif, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_bound, m)?)?;
    m.add_function(wrap_pyfunction!(check_theorem, m)?)?;
    m.add_function(wrap_pyfunction!(natural_image, m)?)?;
    Ok(())
}
