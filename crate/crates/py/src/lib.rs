//! Python bindings: event streams, images, EDI/mEDI reconstruction,
//! threshold search, the simulator and the image metrics.

use std::path::PathBuf;

use evdeblur::edi::{edi_deblur as core_edi, expand_sequence};
use evdeblur::imaging::{self, Psnr};
use evdeblur::medi::{self, MediProblem, ResidualDomain, TridiagonalSystem};
use evdeblur::optimize::{
    default_decay, minimize, EdiEnergy, SearchConfig, SearchMethod, DEFAULT_LAMBDA,
};
use evdeblur::simulator::{self, SceneKind, SceneSpec, SharpSequence, SimConfig};
use evdeblur::{Domain, Event, EventIndex, FrameRecord, ImageBuffer, Polarity, Resolution};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: evdeblur::Error) -> PyErr {
    match e {
        evdeblur::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Linear-intensity grayscale image.
#[pyclass(name = "Image", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyImage {
    inner: ImageBuffer,
}

#[pymethods]
impl PyImage {
    #[new]
    fn new(width: usize, height: usize, data: Vec<f64>) -> PyResult<Self> {
        ImageBuffer::new(width, height, data, Domain::Linear)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn read_pgm(path: PathBuf) -> PyResult<Self> {
        imaging::read_pgm(&path)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn write_pgm(&self, path: PathBuf) -> PyResult<()> {
        imaging::write_pgm(&path, &self.inner).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    /// Row-major samples.
    #[getter]
    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn get(&self, x: usize, y: usize) -> PyResult<f64> {
        if x >= self.inner.width() || y >= self.inner.height() {
            return Err(PyValueError::new_err("pixel outside the image"));
        }
        Ok(self.inner.get(x, y))
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{})", self.inner.width(), self.inner.height())
    }
}

/// Indexed event stream.
#[pyclass(name = "EventStream", frozen)]
pub struct PyEventStream {
    inner: EventIndex,
}

#[pymethods]
impl PyEventStream {
    /// Parses `t x y p` lines.
    #[staticmethod]
    fn parse(text: &str, width: usize, height: usize) -> PyResult<Self> {
        evdeblur::parse_event_stream(text, Resolution::new(width, height))
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Builds a stream from `(t, x, y, polarity)` tuples, polarity +1 or -1.
    #[staticmethod]
    fn from_events(
        events: Vec<(f64, usize, usize, i32)>,
        width: usize,
        height: usize,
    ) -> PyResult<Self> {
        let events = events
            .into_iter()
            .map(|(t, x, y, p)| {
                Polarity::from_sign(p)
                    .map(|polarity| Event { t, x, y, polarity })
                    .ok_or_else(|| PyValueError::new_err(format!("polarity {p} is not +1 or -1")))
            })
            .collect::<PyResult<Vec<_>>>()?;
        EventIndex::from_events(Resolution::new(width, height), events)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Signed event count in `(t0, t1]` at one pixel.
    fn events_between(&self, x: usize, y: usize, t0: f64, t1: f64) -> PyResult<i64> {
        if !self.inner.resolution().contains(x, y) {
            return Err(PyValueError::new_err("pixel outside the sensor"));
        }
        Ok(self.inner.events_between(x, y, t0, t1))
    }

    fn to_text(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.inner
            .write_text(&mut buf)
            .map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(String::from_utf8_lossy(&buf).into_owned())
    }
}

/// Blurred frame with center timestamp and exposure time.
#[pyclass(name = "Frame", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyFrame {
    inner: FrameRecord,
}

#[pymethods]
impl PyFrame {
    #[new]
    fn new(center: f64, exposure: f64, image: &PyImage) -> PyResult<Self> {
        FrameRecord::new(center, exposure, image.inner.clone())
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn center(&self) -> f64 {
        self.inner.center
    }

    #[getter]
    fn exposure(&self) -> f64 {
        self.inner.exposure
    }

    #[getter]
    fn image(&self) -> PyImage {
        PyImage {
            inner: self.inner.image.clone(),
        }
    }
}

fn records(frames: &[PyRef<'_, PyFrame>]) -> Vec<FrameRecord> {
    frames.iter().map(|f| f.inner.clone()).collect()
}

fn image(inner: ImageBuffer) -> PyImage {
    PyImage { inner }
}

/// Single-frame reconstruction at threshold `c`.
#[pyfunction]
fn edi_deblur(frame: &PyFrame, events: &PyEventStream, c: f64) -> PyResult<PyImage> {
    core_edi(&frame.inner, &events.inner, c)
        .map(|l| image(l.image))
        .map_err(to_py)
}

/// Multi-frame reconstruction; `window = 0` couples all frames.
#[pyfunction]
#[pyo3(signature = (frames, events, c, window = medi::DEFAULT_WINDOW))]
fn medi_reconstruct(
    frames: Vec<PyRef<'_, PyFrame>>,
    events: &PyEventStream,
    c: f64,
    window: usize,
) -> PyResult<Vec<PyImage>> {
    let frames = records(&frames);
    let problem = MediProblem::new(&frames, &events.inner, window).map_err(to_py)?;
    let latents = problem.reconstruct(c).map_err(to_py)?;
    Ok(latents.into_iter().map(|l| image(l.image)).collect())
}

/// Estimates `c`. Returns `(c, [(c, energy), ...])`.
#[pyfunction]
#[pyo3(signature = (frames, events, mode = "medi", lo = 0.01, hi = 1.0, tolerance = 1e-3, window = medi::DEFAULT_WINDOW))]
fn estimate_c(
    frames: Vec<PyRef<'_, PyFrame>>,
    events: &PyEventStream,
    mode: &str,
    lo: f64,
    hi: f64,
    tolerance: f64,
    window: usize,
) -> PyResult<(f64, Vec<(f64, f64)>)> {
    let frames = records(&frames);
    let mut config = SearchConfig {
        lo,
        hi,
        tolerance,
        ..Default::default()
    };
    let trace = match mode {
        "medi" => {
            config.method = SearchMethod::Fibonacci;
            let problem = MediProblem::new(&frames, &events.inner, window).map_err(to_py)?;
            minimize(|c| problem.energy(c, ResidualDomain::Log), &config)
        }
        "edi" => {
            let energies = frames
                .iter()
                .map(|f| {
                    EdiEnergy::new(f, &events.inner, DEFAULT_LAMBDA, default_decay(f.exposure))
                })
                .collect::<evdeblur::Result<Vec<_>>>()
                .map_err(to_py)?;
            minimize(
                |c| {
                    let mut sum = 0.0;
                    for e in &energies {
                        sum += e.evaluate(c)?;
                    }
                    Ok(sum / energies.len() as f64)
                },
                &config,
            )
        }
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    }
    .map_err(to_py)?;
    Ok((trace.argmin, trace.evaluations))
}

/// Expanded high-frame-rate video: `[(timestamp, Image), ...]`.
#[pyfunction]
#[pyo3(signature = (frames, events, c, events_per_frame = 75, window = medi::DEFAULT_WINDOW))]
fn expand_video(
    frames: Vec<PyRef<'_, PyFrame>>,
    events: &PyEventStream,
    c: f64,
    events_per_frame: usize,
    window: usize,
) -> PyResult<Vec<(f64, PyImage)>> {
    if events_per_frame == 0 {
        return Err(PyValueError::new_err("events_per_frame must be at least 1"));
    }
    let frames = records(&frames);
    let problem = MediProblem::new(&frames, &events.inner, window).map_err(to_py)?;
    let latents = problem.reconstruct(c).map_err(to_py)?;
    let video = expand_sequence(&latents, &frames, &events.inner, events_per_frame);
    Ok(video
        .frames
        .into_iter()
        .map(|l| (l.timestamp, image(l.image)))
        .collect())
}

/// Synthetic scene. Returns `(events, blurred frames, ground truth images)`.
#[pyfunction]
#[pyo3(signature = (scene = "translating-bar", size = 64, frames = 110, blur_span = 11, c_true = 0.23, rate = 240.0, speed = 1.0, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    scene: &str,
    size: usize,
    frames: usize,
    blur_span: usize,
    c_true: f64,
    rate: f64,
    speed: f64,
    seed: u64,
) -> PyResult<(PyEventStream, Vec<PyFrame>, Vec<PyImage>)> {
    let kind: SceneKind = scene.parse().map_err(PyValueError::new_err)?;
    let spec = SceneSpec {
        kind,
        width: size,
        height: size,
        frames,
        speed,
        seed,
    };
    let config = SimConfig {
        c_true,
        rate,
        blur_span,
        ..Default::default()
    };
    let seq = SharpSequence::at_rate(simulator::make_test_scene(&spec), rate);
    let index = simulator::simulate_events(&seq, &config).map_err(to_py)?;
    let set = simulator::simulate_blur(&seq, &config).map_err(to_py)?;
    Ok((
        PyEventStream { inner: index },
        set.frames
            .into_iter()
            .map(|inner| PyFrame { inner })
            .collect(),
        set.ground_truth.into_iter().map(image).collect(),
    ))
}

/// PSNR in dB; `inf` for identical images.
#[pyfunction]
fn psnr(a: &PyImage, b: &PyImage) -> PyResult<f64> {
    Ok(match imaging::psnr(&a.inner, &b.inner).map_err(to_py)? {
        Psnr::Identical => f64::INFINITY,
        Psnr::Db(db) => db,
    })
}

#[pyfunction]
fn ssim(a: &PyImage, b: &PyImage) -> PyResult<f64> {
    imaging::ssim(&a.inner, &b.inner).map_err(to_py)
}

/// Solves the mEDI normal equations for one right-hand side.
#[pyfunction]
fn solve_normal_equations(rhs: Vec<f64>) -> PyResult<Vec<f64>> {
    if rhs.is_empty() {
        return Err(PyValueError::new_err("right-hand side is empty"));
    }
    Ok(medi::solve_fibonacci_lu(&TridiagonalSystem::new(rhs)).x)
}

#[pymodule]
fn evdeblur_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImage>()?;
    m.add_class::<PyEventStream>()?;
    m.add_class::<PyFrame>()?;
    m.add_function(wrap_pyfunction!(edi_deblur, m)?)?;
    m.add_function(wrap_pyfunction!(medi_reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_c, m)?)?;
    m.add_function(wrap_pyfunction!(expand_video, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(ssim, m)?)?;
    m.add_function(wrap_pyfunction!(solve_normal_equations, m)?)?;
    Ok(())
}
